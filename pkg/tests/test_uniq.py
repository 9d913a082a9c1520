"""Tests for the uniqueness-ingredient probes."""

import math

import numpy as np
import pytest

from sturmdisc.expr import PotentialExpr
from sturmdisc.problem import Problem
from sturmdisc.spectrum import ZeroSequence
from sturmdisc.uniq import (
    collapse_consistency,
    bracket_decay_probe,
    modify_below,
    product_ratio_probe,
)

PI = math.pi


def base_jump():
    return Problem(
        q=PotentialExpr.parse("sin(x)"), h=0.3, H=0.1, beta=1.5, gamma=0.2j
    )


class TestModifyBelow:
    def test_difference_supported_below_b(self):
        p = base_jump()
        b = 2.0
        pb = modify_below(p, b, m=1, weight=0.7)
        xs = np.linspace(0.0, PI, 301)
        diff = pb.q(xs) - p.q(xs)
        want = np.where(xs < b, 0.7 * (xs - b) ** 2, 0.0)
        assert np.max(np.abs(diff - want)) < 1e-12

    def test_vanishing_order_at_b(self):
        p = base_jump()
        b = 1.5
        for m in (0, 1, 2):
            pb = modify_below(p, b, m=m)
            eps = 1e-3
            d = pb.q(np.array([b - eps]))[0] - p.q(np.array([b - eps]))[0]
            assert abs(d) == pytest.approx(eps ** (m + 1), rel=1e-9)

    def test_boundary_shift_and_shared_jump(self):
        p = base_jump()
        pb = modify_below(p, 2.0, m=0, dh=0.25j)
        assert pb.h == p.h + 0.25j
        assert pb.beta == p.beta and pb.gamma == p.gamma and pb.d == p.d

    def test_b_out_of_range(self):
        with pytest.raises(ValueError):
            modify_below(base_jump(), -0.5, m=0)
        with pytest.raises(ValueError):
            modify_below(base_jump(), 4.0, m=0)


class TestBracketDecayProbe:
    YS = np.geomspace(1e2, 1e6, 7)

    def test_decay_order_zero(self):
        p = Problem(q=PotentialExpr.parse("0"))
        pb = modify_below(p, 2.0, m=0)
        probe = bracket_decay_probe(p, pb, 2.0, m=0, ys=self.YS)
        assert probe.passes
        # the bracket actually decays a full order faster than the threshold
        assert probe.slope == pytest.approx(-1.0, abs=0.1)
        assert probe.threshold == pytest.approx(-0.35)

    def test_decay_order_one(self):
        p = Problem(q=PotentialExpr.parse("0"))
        pb = modify_below(p, 2.0, m=1)
        probe = bracket_decay_probe(p, pb, 2.0, m=1, ys=self.YS)
        assert probe.passes
        assert probe.slope == pytest.approx(-1.5, abs=0.1)


class TestCollapsedEvaluation:
    LAMS = np.array(
        [1.7, 12.0, 33.0, 55.0, -1.5, 8.0 + 2.0j, 30.0 - 2.5j, 50.0 + 1.0j]
    )

    @pytest.mark.parametrize("b", [2.2, PI / 2, 1.0])
    def test_agreement_around_jump(self, b):
        # b to the right of, at, and to the left of the discontinuity
        p = base_jump()
        pb = modify_below(p, b, m=0, weight=0.4, dh=0.2)
        rep = collapse_consistency(p, pb, b, lams=self.LAMS)
        assert rep.max_rel < 1e-8

    def test_default_grid(self):
        p = Problem(q=PotentialExpr.parse("0"), h=0.1)
        pb = modify_below(p, 2.0, m=0, dh=0.3)
        rep = collapse_consistency(p, pb, 2.0)
        assert rep.lams.size == 20
        assert rep.max_rel < 1e-8


class TestRatioProbe:
    def test_exact_products_rate(self):
        b = 2.0
        p = Problem(q=PotentialExpr.parse("0"), h=0.2)
        pb = modify_below(p, b, m=0, dh=0.1)
        rep = product_ratio_probe(p, pb, b, ys=np.geomspace(1e2, 1e6, 7))
        assert rep.expected_rate == pytest.approx(-(4 * PI - 2 * b))
        assert rep.fitted_rate == pytest.approx(rep.expected_rate, rel=0.05)
        assert rep.monotone_tail
        assert rep.counting is None

    def test_explicit_products_run_counting_first(self):
        b = 2.0
        p = Problem(q=PotentialExpr.parse("0"), h=0.2)
        pb = modify_below(p, b, m=0, dh=0.1)
        n = np.arange(1, 2001, dtype=float)
        robin = ZeroSequence(n**2 + 1.0, np.ones_like(n), origin="given")
        dirich = ZeroSequence((n + 0.5) ** 2 + 1.0, np.ones_like(n), origin="given")
        rep = product_ratio_probe(
            p,
            pb,
            b,
            seq_robin=robin,
            seq_dirichlet=dirich,
            use_exact_products=False,
            ys=np.geomspace(1e2, 1e4, 5),
        )
        assert rep.counting is not None
        assert rep.counting.satisfied
        assert np.isfinite(rep.log_ratios).all()

    def test_explicit_products_require_sequences(self):
        p = Problem(q=PotentialExpr.parse("0"))
        pb = modify_below(p, 2.0, m=0)
        with pytest.raises(ValueError):
            product_ratio_probe(p, pb, 2.0, use_exact_products=False)
