"""Exercise the uniqueness-ingredient probes on a splice pair.

Builds a base problem with an interior jump, perturbs its potential below
b = 2 (the difference vanishing to first order at b), and reports the three
ray diagnostics: the bracket decay slope, the collapsed-evaluation
consistency, and the ratio against the exact spectral products.

Run from the repository root:

    python scripts/uniqueness_probe_demo.py
"""

import math

from sturmdisc import (
    Problem,
    PotentialExpr,
    collapse_consistency,
    bracket_decay_probe,
    modify_below,
    product_ratio_probe,
)


def main():
    base = Problem(
        q=PotentialExpr.parse("sin(x)"), h=0.3, H=0.1, beta=1.5, gamma=0.2j
    )
    b, m = 2.0, 0
    other = modify_below(base, b, m=m, weight=0.4, dh=0.2)

    probe = bracket_decay_probe(base, other, b, m=m)
    print(
        "bracket ray decay: slope %.3f vs threshold %.3f -> %s"
        % (probe.slope, probe.threshold, "pass" if probe.passes else "fail")
    )

    rep = collapse_consistency(base, other, b)
    print("collapsed evaluation: max relative gap %.2e over %d points"
          % (rep.max_rel, rep.lams.size))

    ratio = product_ratio_probe(base, other, b)
    print(
        "product ratio: fitted rate %.3f vs expected %.3f, tail monotone: %s"
        % (ratio.fitted_rate, ratio.expected_rate, ratio.monotone_tail)
    )


if __name__ == "__main__":
    main()
