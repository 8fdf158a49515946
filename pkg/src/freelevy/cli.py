"""Command-line front end: ``freelevy <subcommand> ...``.

JSON inputs are given inline (``'{"a": 0, "b": 1}'``) or as a file path.
Exit status is 0 on success, 2 for invalid input and 3 for numerical
failure; errors are reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import serialization as S
from .cumulants import (
    classical_cumulants_to_moments,
    free_cumulants_to_moments,
    moments_to_classical_cumulants,
    moments_to_free_cumulants,
)
from .decomposition import kingman_decompose, levy_ito_split, null_array_check, truncate_small_jumps
from .errors import NumericalError, ValidationError
from .integration import integrability_check, integral_triplet
from .levy_basis import control_measure, parse_set, triplet_of_set
from .rmt_oracle import (
    free_convolve_oracle,
    ks_distance,
    sample_fid_matrix,
    sample_gue,
    sample_wishart,
)
from .transforms import (
    DEFAULT_EPS_LADDER,
    convergence_diagnostic,
    density_from_triplet,
    marchenko_pastur_law,
    semicircle_law,
)
from .triplets import (
    CLASSICAL,
    FREE,
    bp_lambda,
    bp_lambda_inv,
    classical_cumulants_from_triplet,
    free_cumulants_from_triplet,
    triplet_sum,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def load_json(arg: str):
    text = arg.strip()
    if not text.startswith(("{", "[")):
        path = Path(arg)
        if not path.is_file():
            raise ValidationError(f"no such input file: {arg}")
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON input: {exc}") from exc


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ValidationError(f"grid must look like lo:hi:n, got {spec!r}") from exc
    if not (lo < hi and n >= 2):
        raise ValidationError("grid needs lo < hi and n >= 2")
    return np.linspace(lo, hi, n)


def parse_floats(spec: str) -> tuple:
    try:
        return tuple(float(x) for x in spec.split(","))
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {spec!r}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _sidecar(out: str | None) -> Path | None:
    return Path(out).with_suffix(".json") if out else None


# -- subcommands -----------------------------------------------------------------


def cmd_density(args) -> None:
    u = S.triplet_from_json(load_json(args.triplet))
    ladder = parse_floats(args.eps) if args.eps else DEFAULT_EPS_LADDER
    d = density_from_triplet(u, parse_grid(args.grid), ladder)
    _emit(S.to_csv(["x", "density", "cdf"], [d.grid, d.density, d.cdf]), args.out)
    side = _sidecar(args.out)
    if side is not None:
        side.write_text(S.dumps(S.density_sidecar(d)), encoding="utf-8")


def cmd_convolve(args) -> None:
    laws = [S.triplet_from_json(load_json(t)) for t in args.triplet]
    if len(laws) < 2:
        raise ValidationError("convolve needs at least two --triplet arguments")
    _emit(S.dumps({"triplet": S.triplet_to_json(triplet_sum(laws, laws[0].flavor))}), args.out)


def cmd_cumulants(args) -> None:
    if args.triplet:
        u = S.triplet_from_json(load_json(args.triplet))
        if u.flavor == FREE:
            k = free_cumulants_from_triplet(u, args.order)
            m = free_cumulants_to_moments(k)
        else:
            k = classical_cumulants_from_triplet(u, args.order)
            m = classical_cumulants_to_moments(k)
        doc = {"flavor": u.flavor, "cumulants": list(k.values), "moments": list(m.values)}
        _emit(S.dumps(doc), args.out)
        return
    free = args.kind == FREE
    if args.moments:
        m = parse_floats(args.moments)
        k = moments_to_free_cumulants(m) if free else moments_to_classical_cumulants(m)
    elif args.cumulants:
        k = parse_floats(args.cumulants)
        m = free_cumulants_to_moments(k) if free else classical_cumulants_to_moments(k)
    else:
        raise ValidationError("cumulants needs --triplet, --moments or --cumulants")
    order = np.arange(1, len(m) + 1)
    _emit(S.to_csv(["order", "cumulant", "moment"], [order, list(k), list(m)]), args.out)


def cmd_bp(args) -> None:
    u = S.triplet_from_json(load_json(args.triplet))
    v = bp_lambda(u) if u.flavor == CLASSICAL else bp_lambda_inv(u)
    _emit(S.dumps({"triplet": S.triplet_to_json(v)}), args.out)


def cmd_basis_triplet(args) -> None:
    field = S.field_from_json(load_json(args.field))
    E = parse_set(args.set)
    doc = {
        "set": args.set,
        "triplet": S.triplet_to_json(triplet_of_set(field, E)),
        "control_measure": control_measure(field, E),
        "kappa": field.kappa(E),
    }
    _emit(S.dumps(doc), args.out)


def cmd_integrate(args) -> None:
    field = S.field_from_json(load_json(args.field))
    f = S.integrand_from_json(load_json(args.integrand))
    report = integrability_check(field, f)
    u = integral_triplet(field, f, refine=args.refine)
    doc = {
        "triplet": S.triplet_to_json(u),
        "integrability": {"drift": report.drift, "gaussian": report.gaussian, "jumps": report.jumps},
    }
    if args.density_out:
        d = density_from_triplet(u, parse_grid(args.grid))
        Path(args.density_out).write_text(S.to_csv(["x", "density", "cdf"], [d.grid, d.density, d.cdf]), encoding="utf-8")
        doc["density"] = S.density_sidecar(d)
    _emit(S.dumps(doc), args.out)


def cmd_levy_ito(args) -> None:
    field = S.field_from_json(load_json(args.field))
    parts = levy_ito_split(field)
    doc = {"parts": S.levy_ito_to_json(parts)}
    if args.set:
        E = parse_set(args.set)
        doc["on_set"] = {
            "set": args.set,
            "drift": parts.drift(E),
            "gaussian": S.triplet_to_json(triplet_of_set(parts.gaussian, E)),
            "jumps": S.triplet_to_json(triplet_of_set(parts.jumps, E)),
            "compensated_drift": None if parts.compensated_drift is None else parts.compensated_drift(E),
        }
    _emit(S.dumps(doc), args.out)


def cmd_decompose(args) -> None:
    model = S.model_from_json(load_json(args.model))
    k = kingman_decompose(model, args.mode)
    doc = {"decomposition": S.kingman_to_json(k)}
    if args.set:
        rep = null_array_check(k, parse_set(args.set), eps=args.eps or 0.1)
        doc["null_array"] = {
            "ns": list(rep.ns),
            "bounds": list(rep.bounds),
            "scaled": list(rep.scaled),
            "passed": rep.passed,
        }
    _emit(S.dumps(doc), args.out)


def cmd_truncate(args) -> None:
    if args.eps is None:
        raise ValidationError("truncate needs --eps")
    field = S.field_from_json(load_json(args.field))
    _emit(S.dumps({"field": S.field_to_json(truncate_small_jumps(field, float(args.eps)))}), args.out)


def _threads() -> int:
    raw = os.environ.get("FREELEVY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ValidationError(f"FREELEVY_THREADS must be an integer, got {raw!r}") from exc


def _simulate_one(ens: dict, seed: int):
    kind = ens.get("kind")
    n = int(ens.get("n", 512))
    if kind == "gue":
        var = float(ens.get("variance", 1.0))
        s = sample_gue(n, var, seed)
        r = 2.0 * var**0.5
        law = semicircle_law(np.linspace(-r - 1.0, r + 1.0, 4001), var)
    elif kind == "wishart":
        lam = float(ens.get("lam", 1.0))
        s = sample_wishart(n, lam, seed)
        law = marchenko_pastur_law(np.linspace(-0.5, (1 + lam**0.5) ** 2 + 1.0, 4001), lam)
    elif kind == "fid":
        u = S.triplet_from_json(ens["triplet"])
        s = sample_fid_matrix(u, n, float(ens.get("eps", 1e-3)), seed)
        lo, hi = float(s.eigenvalues[0]), float(s.eigenvalues[-1])
        pad = 0.25 * (hi - lo) + 0.5
        law = density_from_triplet(u, np.linspace(lo - pad, hi + pad, 2001))
    elif kind == "convolution":
        a = sample_gue(n, float(ens.get("variance_a", 1.0)), seed)
        b = sample_gue(n, float(ens.get("variance_b", 1.0)), seed + 1)
        s = free_convolve_oracle(a, b, seed + 2)
        var = float(ens.get("variance_a", 1.0)) + float(ens.get("variance_b", 1.0))
        r = 2.0 * var**0.5
        law = semicircle_law(np.linspace(-r - 1.0, r + 1.0, 4001), var)
    else:
        raise ValidationError("ensemble kind must be one of gue, wishart, fid, convolution")
    return s, ks_distance(s, law)


def cmd_simulate(args) -> None:
    ens = load_json(args.ensemble)
    if not isinstance(ens, dict):
        raise ValidationError("ensemble must be a JSON object")
    seed = int(args.seed if args.seed is not None else ens.get("seed", 0))
    reps = int(ens.get("replicates", 1))
    if reps < 1:
        raise ValidationError("replicates must be >= 1")
    seeds = [seed + i for i in range(reps)]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda s: _simulate_one(ens, s), seeds))
    rep_col = np.concatenate([np.full(r[0].n, i) for i, r in enumerate(results)])
    ev_col = np.concatenate([r[0].eigenvalues for r in results])
    _emit(S.to_csv(["replicate", "eigenvalue"], [rep_col, ev_col]), args.out)
    report = {"kind": ens.get("kind"), "seeds": seeds, "ks": [r[1] for r in results]}
    side = _sidecar(args.out)
    if side is not None:
        side.write_text(S.dumps(report), encoding="utf-8")
    else:
        sys.stderr.write(S.dumps(report))


def cmd_check_convergence(args) -> None:
    raw = load_json(args.seq)
    if isinstance(raw, dict):
        raw = raw.get("seq", [])
    seq = [S.triplet_from_json(t) for t in raw]
    target = S.triplet_from_json(load_json(args.target))
    rep = convergence_diagnostic(seq, target, tol=args.tol if args.tol is not None else 1e-3)
    _emit(S.dumps({"report": rep.as_dict()}), args.out)


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freelevy", description="Free infinitely divisible laws and free Lévy bases")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = add("density", cmd_density, "spectral density of a free triplet (CSV + JSON sidecar)")
    sp.add_argument("--triplet", required=True)
    sp.add_argument("--grid", default="-3:3:601")
    sp.add_argument("--eps", help="comma-separated decreasing eps ladder")

    sp = add("convolve", cmd_convolve, "triplet of the free (or classical) convolution")
    sp.add_argument("--triplet", action="append", required=True)

    sp = add("cumulants", cmd_cumulants, "cumulants and moments of a triplet, or conversion of a vector")
    sp.add_argument("--triplet")
    sp.add_argument("--order", type=int, default=6)
    sp.add_argument("--moments", help="comma-separated moments m_1..m_p (CSV output)")
    sp.add_argument("--cumulants", help="comma-separated cumulants k_1..k_p (CSV output)")
    sp.add_argument("--kind", choices=(FREE, CLASSICAL), default=FREE)

    sp = add("bp", cmd_bp, "Bercovici-Pata map (classical -> free, or back)")
    sp.add_argument("--triplet", required=True)

    sp = add("basis-triplet", cmd_basis_triplet, "triplet of a set under a seed field")
    sp.add_argument("--field", required=True)
    sp.add_argument("--set", required=True)

    sp = add("integrate", cmd_integrate, "triplet of the integral of a piecewise polynomial")
    sp.add_argument("--field", required=True)
    sp.add_argument("--integrand", required=True)
    sp.add_argument("--refine", type=int, default=64)
    sp.add_argument("--grid", default="-5:5:1001")
    sp.add_argument("--density-out")

    sp = add("levy-ito", cmd_levy_ito, "drift / semicircular / jump split of a field")
    sp.add_argument("--field", required=True)
    sp.add_argument("--set")

    sp = add("decompose", cmd_decompose, "atomic/diffuse decomposition of a completely random measure")
    sp.add_argument("--model", required=True)
    sp.add_argument("--mode", choices=("positive", "signed"), default="positive")
    sp.add_argument("--set", help="run the null-array check on this set")
    sp.add_argument("--eps", type=float)

    sp = add("truncate", cmd_truncate, "jump field with jumps of size <= eps removed")
    sp.add_argument("--field", required=True)
    sp.add_argument("--eps", type=float)

    sp = add("simulate", cmd_simulate, "random-matrix sample (CSV) and KS report (JSON sidecar)")
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--seed", type=int)

    sp = add("check-convergence", cmd_check_convergence, "weak-convergence diagnostic for a triplet sequence")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--tol", type=float)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValidationError, KeyError, TypeError, ValueError) as exc:
        return _fail(exc, EXIT_NUMERIC if isinstance(exc, NumericalError) else EXIT_INVALID)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    return EXIT_OK


def _fail(exc: Exception, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(S.dumps(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
