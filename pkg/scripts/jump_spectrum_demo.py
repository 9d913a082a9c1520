"""Compute the spectrum of a discontinuous problem and compare it with the
closed-form characteristic equation available when q = 0.

Run from the repository root:

    python scripts/jump_spectrum_demo.py
"""

import math

import numpy as np

from sturmdisc import Problem, PotentialExpr, find_eigenvalues

problem = Problem(q=PotentialExpr.parse("0"), beta=2.0, d=math.pi / 3)
b1, b2 = problem.b1, problem.b2


def closed_form(s: float) -> float:
    # for q = 0 the characteristic function is
    # sqrt(lam) (-b1 sin(sqrt(lam) pi) + b2 sin(sqrt(lam) (2d - pi)))
    return -b1 * math.sin(s * math.pi) + b2 * math.sin(s * (2 * problem.d - math.pi))


def bisect_roots(s_max: float) -> list:
    ss = np.linspace(1e-6, s_max, 4000)
    vals = np.array([closed_form(s) for s in ss])
    roots = [0.0]
    for i in range(len(ss) - 1):
        if vals[i] * vals[i + 1] < 0:
            a, b = ss[i], ss[i + 1]
            for _ in range(80):
                mid = 0.5 * (a + b)
                if closed_form(a) * closed_form(mid) <= 0:
                    b = mid
                else:
                    a = mid
            roots.append((0.5 * (a + b)) ** 2)
    return roots


def main():
    records = find_eigenvalues(problem, 120.0)
    oracle = bisect_roots(11.2)
    print("beta = %.1f, d = pi/3, q = 0" % problem.beta)
    print("%4s %16s %16s %12s" % ("n", "eigenvalue", "bisection", "gap"))
    for n, rec in enumerate(sorted(records, key=lambda r: r.lam.real)):
        gap = abs(rec.lam.real - oracle[n]) if n < len(oracle) else float("nan")
        print(
            "%4d %16.10f %16.10f %12.2e" % (n, rec.lam.real, oracle[n], gap)
        )


if __name__ == "__main__":
    main()
