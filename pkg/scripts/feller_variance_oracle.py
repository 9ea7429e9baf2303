#!/usr/bin/env python3
"""Independent brute-force oracle for the Feller second-moment columns.

The shipped reference values for the Feller variance table lose accuracy for
xi >= 4 (their relative error grows to ~1.4e-3 at xi = 5), where the speed
density's endpoint singularity (u - nu)^(gamma-1) is sharpest.  This script
recomputes V(S|x) and V(Tr) with a completely independent method: the exact
series FPT mean t1 as the inner profile, closed-form h and k, the analytic
substitution u = nu + w^(1/gamma), and scipy's adaptive quadrature.

Requires scipy (not a package dependency; install separately).

The pinned constants in tests/test_acceptance.py were produced by this
script.
"""

import math

from scipy.integrate import quad

from elasticfpt.models import FellerParams, feller_fpt_mean

S, X0, NU, THETA = -50.0, -70.0, -80.0, 5.0


def oracle_row(xi: float) -> tuple:
    """(V(S|x0), speed measure K, int k*t1) for one xi."""
    p = FellerParams(THETA, -70.0, xi, NU)
    g = (p.rho - NU) / (THETA * xi)

    def h(z):
        return math.exp(z / (THETA * xi)) * (z - NU) ** (-g)

    def inner(z, f):
        # int_nu^z k(u) f(u) du after u = nu + w^(1/g): k du = e^{-u/(theta xi)}/(xi g) dw
        def integrand(w):
            u = NU + w ** (1.0 / g)
            return math.exp(-u / (THETA * xi)) / (xi * g) * f(u)

        return quad(integrand, 0.0, (z - NU) ** g, epsabs=0.0, epsrel=1e-12, limit=200)[0]

    def t1(u):
        return feller_fpt_mean(p, S, u)

    outer = quad(lambda z: h(z) * inner(z, t1), X0, S, epsabs=0.0, epsrel=1e-10, limit=200)[0]
    V = 2.0 * outer - t1(X0) ** 2
    K = inner(S, lambda u: 1.0)
    int_k_t1 = inner(S, t1)
    return V, K, int_k_t1


def main() -> None:
    print("xi    V(S|x)           V(Tr) p_R=0.1    V(Tr) p_R=0.5    V(Tr) p_R=0.9    V(Tr) p_R=0.99")
    for xi in (3.5, 4.0, 4.5, 5.0):
        V, K, int_k_t1 = oracle_row(xi)
        cells = [V]
        for p_r in (0.1, 0.5, 0.9, 0.99):
            r = p_r / (1.0 - p_r)
            cells.append(2.0 * r * int_k_t1 + (r * K) ** 2)
        print(f"{xi:<4}  " + "  ".join(f"{c:.9E}" for c in cells))


if __name__ == "__main__":
    main()
