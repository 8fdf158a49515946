"""JSON and CSV encoding of the library's value types.

Every document carries ``"schema": 1``. Floats are written with Python's
shortest round-trip repr and keys are sorted, so equal values always give
byte-identical output.
"""

from __future__ import annotations

import io
import json
from typing import Any

import numpy as np

from .cumulants import MomentVector
from .decomposition import AtomLaw, FCRMModel, KingmanDecomposition, LevyItoParts
from .errors import ValidationError
from .integration import PiecewisePolynomial
from .levy_basis import Cell, KappaAtom, SeedField, SignedSetMeasure, format_set, parse_set
from .measures import DensityPiece, LevyMeasure, NearZero
from .transforms import SpectralDensity
from .triplets import FREE, FreeTriplet

SCHEMA = 1


def dumps(doc: dict) -> str:
    doc = dict(doc)
    doc.setdefault("schema", SCHEMA)
    return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def _get(d: dict, key: str, default: Any = ...):
    if key in d:
        return d[key]
    if default is ...:
        raise ValidationError(f"missing field {key!r}")
    return default


def _num(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValidationError(f"expected a number, got {x!r}")
    return float(x)


# -- Lévy measures and triplets ------------------------------------------------


def levy_to_json(r: LevyMeasure) -> dict:
    near = [
        {"alpha": nz.alpha, "c_plus": nz.c_plus, "c_minus": nz.c_minus, "eps0": nz.eps0} for nz in r.near_zero
    ]
    return {
        "atoms": [[t, m] for t, m in r.atoms],
        "near_zero": None if not near else (near[0] if len(near) == 1 else near),
        "body": [{"lo": p.lo, "hi": p.hi, "coeffs": list(p.coeffs), "power": p.power} for p in r.body],
    }


def levy_from_json(d: dict | None) -> LevyMeasure:
    if d is None:
        return LevyMeasure()
    if not isinstance(d, dict):
        raise ValidationError("Lévy measure must be a JSON object")
    atoms = tuple((_num(t), _num(m)) for t, m in _get(d, "atoms", []))
    nz = _get(d, "near_zero", None)
    if nz is None:
        nz = []
    elif isinstance(nz, dict):
        nz = [nz]
    near = tuple(
        NearZero(_num(p["alpha"]), _num(p.get("c_plus", 0.0)), _num(p.get("c_minus", 0.0)), _num(p["eps0"])) for p in nz
    )
    body = tuple(
        DensityPiece(_num(p["lo"]), _num(p["hi"]), tuple(_num(c) for c in p["coeffs"]), _num(p.get("power", 0.0)))
        for p in _get(d, "body", [])
    )
    return LevyMeasure(atoms, near, body)


def triplet_to_json(u: FreeTriplet) -> dict:
    return {"a": u.a, "b": u.b, "r": levy_to_json(u.r), "flavor": u.flavor}


def triplet_from_json(d: dict) -> FreeTriplet:
    if not isinstance(d, dict):
        raise ValidationError("triplet must be a JSON object")
    return FreeTriplet(_num(_get(d, "a")), _num(_get(d, "b")), levy_from_json(d.get("r")), d.get("flavor", FREE))


# -- fields ----------------------------------------------------------------------


def _seed_json(theta, sigma2, rho) -> dict:
    return {"theta": theta, "sigma2": sigma2, "rho": levy_to_json(rho)}


def field_to_json(f: SeedField) -> dict:
    return {
        "cells": [
            dict(lo=c.lo, hi=c.hi, kappa_density=c.kappa_density, **_seed_json(c.theta, c.sigma2, c.rho))
            for c in f.cells
        ],
        "kappa_atoms": [dict(x=a.x, mass=a.mass, **_seed_json(a.theta, a.sigma2, a.rho)) for a in f.kappa_atoms],
        "carrier": format_set(f.carrier),
    }


def field_from_json(d: dict) -> SeedField:
    if not isinstance(d, dict):
        raise ValidationError("field must be a JSON object")
    cells = tuple(
        Cell(
            _num(c["lo"]),
            _num(c["hi"]),
            _num(c.get("theta", 0.0)),
            _num(c.get("sigma2", 0.0)),
            levy_from_json(c.get("rho")),
            _num(c.get("kappa_density", 1.0)),
        )
        for c in _get(d, "cells", [])
    )
    atoms = tuple(
        KappaAtom(
            _num(a["x"]), _num(a["mass"]), _num(a.get("theta", 0.0)), _num(a.get("sigma2", 0.0)), levy_from_json(a.get("rho"))
        )
        for a in _get(d, "kappa_atoms", [])
    )
    carrier = d.get("carrier")
    return SeedField(cells, atoms, parse_set(carrier) if carrier is not None else None)


def signed_to_json(m: SignedSetMeasure) -> dict:
    return {"cells": [list(c) for c in m.cells], "atoms": [list(a) for a in m.atoms]}


def signed_from_json(d: dict) -> SignedSetMeasure:
    return SignedSetMeasure(tuple(tuple(c) for c in d.get("cells", [])), tuple(tuple(a) for a in d.get("atoms", [])))


# -- integrands, models ----------------------------------------------------------


def integrand_to_json(f: PiecewisePolynomial) -> dict:
    return {"pieces": [{"lo": lo, "hi": hi, "coeffs": list(c)} for lo, hi, c in f.pieces]}


def integrand_from_json(d: dict) -> PiecewisePolynomial:
    if "step" in d:
        return PiecewisePolynomial.step([(_num(a), _num(b), _num(v)) for a, b, v in d["step"]])
    return PiecewisePolynomial(
        tuple((_num(p["lo"]), _num(p["hi"]), tuple(_num(c) for c in p["coeffs"])) for p in _get(d, "pieces"))
    )


def law_to_json(law) -> dict:
    if isinstance(law, MomentVector):
        return {"moments": list(law.values)}
    return {"triplet": triplet_to_json(law)}


def law_from_json(d: dict):
    if "moments" in d:
        return MomentVector(tuple(_num(m) for m in d["moments"]))
    if "triplet" in d:
        return triplet_from_json(d["triplet"])
    return triplet_from_json(d)


def model_to_json(m: FCRMModel) -> dict:
    return {
        "diffuse": field_to_json(m.diffuse),
        "atoms": [{"x": a.x, "law": law_to_json(a.law), "positive": a.positive} for a in m.atoms],
    }


def model_from_json(d: dict) -> FCRMModel:
    atoms = tuple(
        AtomLaw(_num(a["x"]), law_from_json(a["law"]), bool(a.get("positive", False))) for a in d.get("atoms", [])
    )
    return FCRMModel(field_from_json(_get(d, "diffuse")), atoms)


def kingman_to_json(k: KingmanDecomposition) -> dict:
    return {
        "mode": k.mode,
        "atomic": [{"x": a.x, "law": law_to_json(a.law), "mu_mass": a.mu_mass} for a in k.atomic],
        "dropped": list(k.dropped),
        "diffuse": field_to_json(k.diffuse),
    }


def levy_ito_to_json(p: LevyItoParts) -> dict:
    return {
        "drift": signed_to_json(p.drift),
        "gaussian": field_to_json(p.gaussian),
        "jumps": field_to_json(p.jumps),
        "compensated_drift": None if p.compensated_drift is None else signed_to_json(p.compensated_drift),
    }


def density_sidecar(d: SpectralDensity) -> dict:
    return {
        "atoms": [[x, m] for x, m in d.atoms],
        "support_estimate": list(d.support_estimate),
        "total_mass": d.total_mass,
        "flagged": [float(d.grid[i]) for i in d.flagged],
    }


# -- CSV -------------------------------------------------------------------------


def to_csv(header: list, columns: list) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    for row in arr:
        buf.write(",".join("%.17g" % v for v in row) + "\n")
    return buf.getvalue()
