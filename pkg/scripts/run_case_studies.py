"""Run the four case studies with their presets and write the results.

    python scripts/run_case_studies.py --out results [--seed 0] [--skip-mc]

Produces ``<out>/A1``, ``<out>/A2`` (time-resolved UQ, PCE and MC),
``<out>/A2_oat/<input>`` (one-at-a-time), ``<out>/B1`` (shelf-temperature
design) and ``<out>/B2`` (time-optimal control), then prints a short digest.
"""

import argparse
import time
from pathlib import Path

from lyopce.stats import confidence_interval
from lyopce.studies import (
    HOUR,
    case_config,
    design_min_shelf_temperature,
    minimize_drying_time,
    one_at_a_time_study,
    run_uq_study,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-mc", action="store_true", help="PCE only")
    args = ap.parse_args()
    out = Path(args.out)
    method = "pce" if args.skip_mc else "both"

    for case in ("A1", "A2"):
        t0 = time.perf_counter()
        res = run_uq_study(case_config(case, seed=args.seed, method=method))
        res.write(out / case)
        for s, d in zip(res.series["pce"], res.final["pce"]):
            lo, hi = confidence_interval(d)
            print(f"{case} {s.name}: final mean {d.mean:.5g}, 95% CI [{lo:.5g}, {hi:.5g}]")
        if res.ks:
            print(f"{case} KS(PCE, MC): {res.ks}")
        print(f"{case} took {time.perf_counter() - t0:.1f} s")

    a2 = case_config("A2", seed=args.seed, method="pce")
    for inp in a2.inputs:
        res = one_at_a_time_study(a2, inp.name)
        res.write(out / "A2_oat" / inp.name)
        s = res.series["pce"][1]
        print(f"A2 only {inp.name}: final c_w band width {s.hi[-1] - s.lo[-1]:.4f}")

    t0 = time.perf_counter()
    b1 = design_min_shelf_temperature(case_config("B1", seed=args.seed))
    b1.write(out / "B1", case_config("B1", seed=args.seed), time.perf_counter() - t0)
    print(f"B1 minimum shelf temperature: {b1.T_b:.2f} K (P = {b1.chance.probability:.4f})")

    t0 = time.perf_counter()
    b2 = minimize_drying_time(case_config("B2", seed=args.seed))
    b2.write(out / "B2", case_config("B2", seed=args.seed), time.perf_counter() - t0)
    print(f"B2 shortest drying time: {b2.t_f / HOUR:.3f} h at T_b = {b2.T_b:.1f} K "
          f"(P = {b2.chance.probability:.4f})")


if __name__ == "__main__":
    main()
