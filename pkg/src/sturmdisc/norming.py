"""Generalized norming constants and the derivative identity they satisfy.

For an eigenvalue ``lam_n`` of multiplicity ``m`` the chain members
``phi_nu`` (normalized lambda-derivatives of ``phi``) span the root
subspace.  The two families of constants are

* ``kappa_nu = phi_nu(pi)`` (Robin right end) or ``phi_nu'(pi)``
  (Dirichlet), ``nu = 0..m-1``;
* ``alpha_nu = integral_0^pi psi_nu psi_{m-1} dx`` built from the chain of
  the right-end solution ``psi``.

They are tied to the characteristic function through

    delta^(m+nu)(lam_n) = -(m+nu)! * sum_{j=0}^{nu} kappa_j alpha_{nu-j},

which is the computable contract between the spectrum and the norming data;
:func:`check_identity` reports its relative residuals.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .charfn import char_delta
from .ode import ChainSolution, solve_chain
from .problem import Problem
from .spectrum import EigenRecord

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass
class NormingRecord:
    lam: complex
    multiplicity: int
    kappas: list  # kappa_0 .. kappa_{m-1}
    alphas: list  # alpha_0 .. alpha_{m-1}


def _chain_product_integral(sol: ChainSolution, nu_a: int, nu_b: int) -> complex:
    """``integral (chain_a * chain_b) dx`` over the solved range, including
    the exponential scale stripped off by the integrator."""

    lam = sol.lam
    rate = abs(cmath.sqrt(lam))
    total = 0.0 + 0.0j
    for seg in sol.segments:
        lo, hi = min(seg.a, seg.b), max(seg.a, seg.b)
        n_panels = max(6, int(1.0 * rate * (hi - lo)) + 1)
        edges = np.linspace(lo, hi, n_panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            xs = 0.5 * (b - a) * _GL_NODES + 0.5 * (a + b)
            vals = seg.sol(xs)  # (dim, npts)
            vals = vals.reshape(sol.nu_max + 1, 2, xs.size)
            weight = np.exp(2.0 * sol.mu * np.abs(xs - sol.x_from))
            f = vals[nu_a, 0] * vals[nu_b, 0] * weight
            total += 0.5 * (b - a) * np.dot(_GL_WEIGHTS, f)
    return complex(total)


def compute_norming(problem: Problem, record: EigenRecord) -> NormingRecord:
    """Both norming families at one eigenvalue."""

    m = record.multiplicity
    lam = record.lam
    phi = solve_chain(problem, lam, nu_max=max(2 * m - 1, 1), side="left")
    z = phi.end_state
    scale = math.exp(phi.end_logscale)
    comp = 1 if problem.dirichlet else 0
    kappas = [complex(z[nu, comp]) * scale for nu in range(m)]
    psi = solve_chain(problem, lam, nu_max=m - 1, side="right")
    alphas = [
        _chain_product_integral(psi, nu, m - 1) for nu in range(m)
    ]
    return NormingRecord(lam=lam, multiplicity=m, kappas=kappas, alphas=alphas)


def check_identity(
    problem: Problem,
    record: EigenRecord,
    norming: NormingRecord | None = None,
) -> list:
    """Relative residuals of the derivative identity, one per ``nu``.

    Returns ``|delta^(m+nu) + (m+nu)! sum_j kappa_j alpha_{nu-j}| /
    |delta^(m+nu)|`` for ``nu = 0..m-1``.
    """

    if norming is None:
        norming = compute_norming(problem, record)
    m = record.multiplicity
    sample = char_delta(problem, record.lam, nu_max=2 * m - 1)
    residuals = []
    for nu in range(m):
        lhs = sample.ddelta[m + nu].value
        conv = sum(
            norming.kappas[j] * norming.alphas[nu - j] for j in range(nu + 1)
        )
        rhs = -math.factorial(m + nu) * conv
        scale = max(abs(lhs), abs(rhs), 1e-300)
        residuals.append(abs(lhs - rhs) / scale)
    return residuals
