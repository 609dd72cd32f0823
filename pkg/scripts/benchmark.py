"""Time the PCE and Monte Carlo paths of each case (mean and standard
deviation over repeated runs).

    python scripts/benchmark.py [--cases A1 A2 B1 B2] [--reps 10]
"""

import argparse

from lyopce.studies import benchmark_methods, case_config, run_uq_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--cases", nargs="+", default=["A1", "A2"])
    ap.add_argument("--reps", type=int, default=10)
    args = ap.parse_args()
    # compile and warm the caches before timing
    run_uq_study(case_config("A1", method="pce"))
    run_uq_study(case_config("A2", method="pce"))
    rows = benchmark_methods(args.cases, args.reps)
    print(f"{'case':<6}{'PCE [s]':>18}{'MC [s]':>20}{'speed-up':>10}")
    for r in rows:
        print(f"{r['case']:<6}{r['pce_mean']:>10.3f} ± {r['pce_std']:<6.3f}"
              f"{r['mc_mean']:>12.3f} ± {r['mc_std']:<6.3f}{r['mc_mean'] / r['pce_mean']:>9.1f}x")


if __name__ == "__main__":
    main()
