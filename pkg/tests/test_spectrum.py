"""Tests for the eigenvalue search."""

import cmath
import math

import numpy as np
import pytest

from sturmdisc.charfn import char_delta
from sturmdisc.expr import PotentialExpr
from sturmdisc.problem import Problem
from sturmdisc.spectrum import (
    ZeroSequence,
    count_zeros,
    counting_function,
    find_dirichlet_eigenvalues,
    find_eigenvalues,
    multiplicity_probe,
)

PI = math.pi


def free(**kw):
    return Problem(q=PotentialExpr.parse("0"), **kw)


class TestWindingCounts:
    def test_polynomial_count(self):
        def f(lams):
            lams = np.asarray(lams, dtype=complex)
            return (lams - 5.0) ** 2 * (lams - 20.0)

        assert count_zeros(f, (0.0, 25.0, -3.0, 3.0)) == 3
        assert count_zeros(f, (0.0, 10.0, -3.0, 3.0)) == 2
        assert count_zeros(f, (30.0, 40.0, -3.0, 3.0)) == 0

    def test_multiplicity_probe(self):
        def f(lams):
            lams = np.asarray(lams, dtype=complex)
            return (lams - 5.0) ** 2 * (lams - 20.0)

        assert multiplicity_probe(f, 5.0) == 2
        assert multiplicity_probe(f, 20.0) == 1

    def test_complex_zero_off_axis(self):
        def f(lams):
            lams = np.asarray(lams, dtype=complex)
            return (lams - (4.0 + 2.0j)) * (lams - 9.0)

        assert count_zeros(f, (0.0, 12.0, -5.0, 5.0)) == 2
        assert count_zeros(f, (0.0, 12.0, 1.0, 5.0)) == 1


class TestClassicalSpectra:
    def test_free_neumann_squares(self):
        records = find_eigenvalues(free(), 90.0)
        lams = sorted(r.lam.real for r in records)
        assert len(lams) == 10
        for n, lam in enumerate(lams):
            assert abs(lam - n * n) < 1e-8
            assert abs(records[0].lam.imag) < 1e-8

    def test_free_dirichlet_half_integers(self):
        records = find_dirichlet_eigenvalues(free(), 90.0)
        lams = sorted(r.lam.real for r in records)
        want = [(n + 0.5) ** 2 for n in range(10)]
        want = [w for w in want if w <= 90.0]
        assert len(lams) == len(want)
        for got, expect in zip(lams, want):
            assert abs(got - expect) < 1e-8

    def test_all_simple(self):
        for r in find_eigenvalues(free(), 60.0):
            assert r.multiplicity == 1
            assert r.residual < 1e-6


class TestJumpSpectrum:
    def test_matches_bisection_oracle(self):
        # q=0, gamma=0, h=H=0: eigenvalues are the real roots of
        #   -b1 sin(s pi) + b2 sin(s (2d - pi)) = 0, s = sqrt(lam)
        p = free(beta=2.0, d=PI / 3)

        def oracle(s):
            return -p.b1 * math.sin(s * PI) + p.b2 * math.sin(s * (2 * p.d - PI))

        # bisection on the s axis (roots are real and lam=0 is one of them)
        roots = [0.0]
        grid = np.linspace(1e-6, math.sqrt(70.0), 4000)
        vals = [oracle(s) for s in grid]
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa == 0 or fa * fb < 0:
                lo, hi = a, b
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if oracle(lo) * oracle(mid) <= 0:
                        hi = mid
                    else:
                        lo = mid
                roots.append(0.5 * (lo + hi))
        want = sorted(s * s for s in roots)

        records = find_eigenvalues(p, 70.0)
        got = sorted(r.lam.real for r in records)
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert abs(g - w) < 1e-8


class TestComplexPotential:
    def test_residuals_and_closure(self):
        p = Problem(
            q=PotentialExpr.parse("sin(x) + 0.5i * cos(2 * x)"),
            h=0.2 + 0.1j,
            H=0.3,
            beta=1.5,
            gamma=0.2j,
            d=1.2,
        )
        records = find_eigenvalues(p, 40.0)
        assert len(records) >= 5
        for r in records:
            s = char_delta(p, r.lam, rtol=1e-12, atol=1e-14)
            # relative smallness of delta at the root
            scale = char_delta(p, r.lam + 0.5).delta.log_abs
            assert s.delta.log_abs - scale < math.log(1e-7)


class TestZeroSequence:
    def test_counting_function(self):
        seq = ZeroSequence(np.array([1.0, 4.0, 9.0]), np.array([1, 2, 1]))
        assert counting_function(seq, 0.5) == 0
        assert counting_function(seq, 4.0) == 3
        assert counting_function(seq, 100.0) == 4

    def test_merge(self):
        a = ZeroSequence(np.array([1.0]), np.array([1]))
        b = ZeroSequence(np.array([2.0]), np.array([3]))
        merged = a.merged(b)
        assert counting_function(merged, 10.0) == 4

    def test_from_records(self):
        records = find_eigenvalues(free(), 20.0)
        seq = ZeroSequence.from_records(records)
        assert counting_function(seq, 20.0) == len(records)
