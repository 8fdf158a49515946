"""Random-matrix spectra against the analytic laws.

For each ensemble and matrix size the KS distance between the empirical
spectral distribution and the predicted law is recorded over several seeds;
the distance should shrink as the size grows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from _config import parse_config, write_outputs
from freelevy.measures import LevyMeasure
from freelevy.rmt_oracle import free_convolve_oracle, ks_distance, sample_fid_matrix, sample_gue, sample_wishart
from freelevy.transforms import density_from_triplet, marchenko_pastur_law, semicircle_law
from freelevy.triplets import FreeTriplet, free_poisson, triplet_add


@dataclass
class Config:
    sizes: tuple = (128, 256, 512, 1024)
    seeds: tuple = (0, 1, 2)
    wishart_ratio: float = 0.5
    jump_eps: float = 1e-3
    out_dir: str = "results/rmt_validation"


def semicircle(var: float):
    r = 2 * np.sqrt(var)
    return semicircle_law(np.linspace(-r - 1, r + 1, 4001), var)


def ensembles(cfg: Config):
    lam = cfg.wishart_ratio
    mp = marchenko_pastur_law(np.union1d(np.linspace(-0.5, (1 + lam**0.5) ** 2 + 1, 4001), [0.0]), lam)
    # free Poisson plus a two-sided jump law and a semicircular part
    mixed = triplet_add(free_poisson(1.0, 1.0), FreeTriplet(0.0, 0.25, LevyMeasure(atoms=((-2.0, 0.3),))))
    mixed_law = density_from_triplet(mixed, np.linspace(-6, 7, 2601))
    sc1, sc2 = semicircle(1.0), semicircle(2.0)
    yield "gue", lambda n, s: sample_gue(n, 1.0, s), sc1
    yield f"wishart_{lam}", lambda n, s: sample_wishart(n, lam, s), mp
    yield "compound_mixed", lambda n, s: sample_fid_matrix(mixed, n, cfg.jump_eps, s), mixed_law
    yield "gue_plus_gue", lambda n, s: free_convolve_oracle(sample_gue(n, 1.0, s), sample_gue(n, 1.0, s + 1000), s), sc2


def main() -> None:
    cfg = parse_config(Config, __doc__)
    rows = []
    for name, draw, law in ensembles(cfg):
        for n in cfg.sizes:
            t0 = time.perf_counter()
            ks = [ks_distance(draw(n, s), law) for s in cfg.seeds]
            rows.append({"ensemble": name, "n": n, "ks_mean": float(np.mean(ks)), "ks_max": float(np.max(ks)), "seconds": time.perf_counter() - t0})
            print(f"{name:>15} n={n:5d}  KS mean {np.mean(ks):.4f}  max {np.max(ks):.4f}")
    summary = {}
    for name in dict.fromkeys(r["ensemble"] for r in rows):
        ks = [r["ks_mean"] for r in rows if r["ensemble"] == name]
        ns = [r["n"] for r in rows if r["ensemble"] == name]
        slope = float(np.polyfit(np.log(ns), np.log(ks), 1)[0]) if len(ns) > 1 else float("nan")
        summary[name] = {"ks_at_largest_n": ks[-1], "log_log_slope": slope}
    print("results in", write_outputs(cfg.out_dir, "rmt_validation", cfg, rows, summary))


if __name__ == "__main__":
    main()
