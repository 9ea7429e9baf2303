#!/usr/bin/env python3
"""Heavy Monte Carlo cross-checks of the analytic moments.

Usage: run_mc_checks.py [--n N] [--seed S]

Runs the three path samplers at configurable sample sizes and prints each
estimate next to its analytic target with a z-score.  Expect several minutes
at the default sizes.
"""

import argparse
import time

import numpy as np

from elasticfpt.deadtime import CounterParams, output_distribution
from elasticfpt.diffusion import ElasticThreshold
from elasticfpt.models import OUParams, WienerParams, ou_spec, wiener_spec
from elasticfpt.moments import fpt_moment, refractory_moment
from elasticfpt.montecarlo import simulate_counter, simulate_fet_elastic, simulate_fpt


def check(label: str, mean: float, se: float, target: float) -> None:
    z = (mean - target) / se if se > 0 else float("inf")
    print(f"  {label}: estimate {mean:.6g} +- {se:.3g}, target {target:.6g}, z = {z:+.2f}")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    args = ap.parse_args()

    wiener = wiener_spec(WienerParams(mu=-0.5, sigma2=10.0, nu=-80.0))
    ou = ou_spec(OUParams(theta=5.0, rho=-70.0, sigma2=200.0, nu=-80.0))

    t0 = time.time()
    print(f"Euler-Maruyama FPT, n = {args.n}:")
    st = simulate_fpt(wiener, -50.0, -70.0, args.n, dt=5e-3, seed=args.seed)
    check("wiener sigma2=10, dt=5e-3", st.mean, st.se, fpt_moment(wiener, -50.0, -70.0, 1))
    st = simulate_fpt(ou, -50.0, -70.0, args.n, dt=1e-4, seed=args.seed)
    check("ou sigma2=200, dt=1e-4", st.mean, st.se, fpt_moment(ou, -50.0, -70.0, 1))

    print("elastic lattice walk:")
    th = ElasticThreshold.from_reflection_probability(-50.0, 0.5)
    target = refractory_moment(wiener, th, 1)
    for dx in (2.0, 1.0):
        res = simulate_fet_elastic(wiener, th, -70.0, max(args.n // 2, 2), dx, seed=args.seed)
        check(f"wiener p_R=0.5 refractory, dx={dx}", res.refractory.mean,
              res.refractory.se, target)

    print("dead-time counter, 10x windows:")
    n_win = 10 * args.n
    hist = simulate_counter(1.0, 5.0, 1.0, n_win, seed=args.seed)
    dist = output_distribution(CounterParams(1.0, 5.0, 1.0))
    emp = hist[: len(dist.pmf)] / n_win
    for i, (e, p) in enumerate(zip(emp, dist.pmf)):
        se = np.sqrt(p * (1 - p) / n_win)
        if se > 0:
            check(f"counter bin n={i}", e, se, p)

    print(f"total {time.time() - t0:.1f} s")


if __name__ == "__main__":
    main()
