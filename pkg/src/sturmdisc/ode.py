"""Initial-value machinery for ``-y'' + q y = lam y`` with an interior jump.

Everything is integrated in exponentially rescaled variables

    z(x) = y(x) * exp(-mu * |x - x_start|),      mu = |Im sqrt(lam)|,

so that solutions stay O(1) even far out on rays like ``lam = i y`` where the
raw solutions grow like ``exp(sqrt(y/2) x)`` and overflow float64 long before
``y = 1e6``.  Results are reported as :class:`ScaledVal` pairs
``(val, log)`` meaning ``val * exp(log)``.

The solver simultaneously advances the chain

    -y_nu'' + q y_nu = lam y_nu + y_{nu-1},   y_{-1} := 0,

whose members are the normalized lambda-derivatives ``(1/nu!) d^nu y/d lam^nu``
of the base solution; this is how characteristic-function derivatives and
multiple-eigenvalue data are obtained without finite differencing.

At the discontinuity ``x = d`` the state is pushed through the matching
conditions (or their inverse when integrating right-to-left).  Bilinear
integrals of pairs of solutions from two different problems can be
accumulated inside the same solve (:func:`pair_integrals`); this matters
because quantities like ``y*z' - y'*z`` between two nearby problems are
exponentially smaller than their factors, and accumulating the exact
integral form avoids the catastrophic cancellation of forming the
difference afterwards.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .expr import PotentialExpr
from .problem import Problem

RTOL = 1e-10
ATOL = 1e-12


# ---------------------------------------------------------------------------
# Scaled values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaledVal:
    """A complex number stored as ``val * exp(log)`` with real ``log``."""

    val: complex
    log: float = 0.0

    @classmethod
    def of(cls, z: complex) -> "ScaledVal":
        return cls(complex(z), 0.0)

    @property
    def value(self) -> complex:
        return self.val * math.exp(self.log) if self.val != 0 else 0.0

    @property
    def log_abs(self) -> float:
        a = abs(self.val)
        return -math.inf if a == 0 else math.log(a) + self.log

    def normalized(self) -> "ScaledVal":
        a = abs(self.val)
        if a == 0:
            return ScaledVal(0.0, -math.inf)
        return ScaledVal(self.val / a, self.log + math.log(a))

    def __mul__(self, other):
        if isinstance(other, ScaledVal):
            return ScaledVal(self.val * other.val, self.log + other.log)
        return ScaledVal(self.val * other, self.log)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScaledVal):
            return ScaledVal(self.val / other.val, self.log - other.log)
        return ScaledVal(self.val / other, self.log)

    def __neg__(self):
        return ScaledVal(-self.val, self.log)

    def __add__(self, other):
        if not isinstance(other, ScaledVal):
            other = ScaledVal.of(other)
        hi, lo = (self, other) if self.log >= other.log else (other, self)
        shift = math.exp(lo.log - hi.log) if lo.log - hi.log > -745 else 0.0
        return ScaledVal(hi.val + lo.val * shift, hi.log)

    def __sub__(self, other):
        if not isinstance(other, ScaledVal):
            other = ScaledVal.of(other)
        return self + (-other)

    def __abs__(self) -> float:
        try:
            return abs(self.val) * math.exp(self.log)
        except OverflowError:
            return math.inf


def growth_rate(lam: complex) -> float:
    """``|Im sqrt(lam)|`` for the principal branch."""

    return abs(cmath.sqrt(lam).imag)


# ---------------------------------------------------------------------------
# Jump conditions
# ---------------------------------------------------------------------------


def jump_forward(state, beta: float, gamma: complex):
    """Apply the interior matching to ``state[..., (y, y')]`` left-to-right."""

    y, dy = state[..., 0], state[..., 1]
    out = np.empty_like(state)
    out[..., 0] = beta * y
    out[..., 1] = dy / beta + gamma * y
    return out


def jump_backward(state, beta: float, gamma: complex):
    y, dy = state[..., 0], state[..., 1]
    out = np.empty_like(state)
    out[..., 0] = y / beta
    out[..., 1] = beta * dy - gamma * y
    return out


# ---------------------------------------------------------------------------
# Single-problem chain solve
# ---------------------------------------------------------------------------


def _ordered_breaks(x_from: float, x_to: float, pts: Sequence[float]) -> list[float]:
    lo, hi = min(x_from, x_to), max(x_from, x_to)
    inner = sorted({p for p in pts if lo + 1e-12 < p < hi - 1e-12})
    path = [lo] + inner + [hi]
    if x_from > x_to:
        path.reverse()
    return path


@dataclass
class _Segment:
    a: float
    b: float
    sol: object  # OdeSolution over [min(a,b), max(a,b)] in x


class ChainSolution:
    """Dense solution of a chain solve between ``x_from`` and ``x_to``."""

    def __init__(self, problem, lam, nu_max, x_from, x_to, segments, mu):
        self.problem = problem
        self.lam = lam
        self.nu_max = nu_max
        self.x_from = x_from
        self.x_to = x_to
        self.segments = segments
        self.mu = mu

    def logscale(self, x: float) -> float:
        return self.mu * abs(x - self.x_from)

    def state(self, x: float, side: str = "auto") -> np.ndarray:
        """Scaled chain state at ``x``: shape ``(nu_max+1, 2)`` = (y, y').

        At the discontinuity, ``side='-'`` / ``'+'`` select the one-sided
        limits; ``'auto'`` takes whichever segment comes first along the
        integration direction.
        """

        cands = [
            seg
            for seg in self.segments
            if min(seg.a, seg.b) - 1e-12 <= x <= max(seg.a, seg.b) + 1e-12
        ]
        if not cands:
            raise ValueError(f"x={x} outside solved range")
        seg = cands[0]
        if side in ("-", "left"):
            for s in cands:
                if abs(max(s.a, s.b) - x) <= 1e-12:
                    seg = s
                    break
        elif side in ("+", "right"):
            for s in cands:
                if abs(min(s.a, s.b) - x) <= 1e-12:
                    seg = s
                    break
        z = seg.sol(x)
        return z.reshape(self.nu_max + 1, 2)

    def value(self, x: float, nu: int = 0, deriv: int = 0, side: str = "auto") -> ScaledVal:
        z = self.state(x, side)
        return ScaledVal(complex(z[nu, deriv]), self.logscale(x))

    @property
    def end_state(self) -> np.ndarray:
        return self.state(self.x_to, side="-" if self.x_to > self.x_from else "+")

    @property
    def end_logscale(self) -> float:
        return self.logscale(self.x_to)


def _chain_rhs(qfn: Callable, lam: complex, mu_signed: float, nu_max: int):
    def rhs(x, z):
        z = z.reshape(nu_max + 1, 2)
        out = np.empty_like(z)
        qv = qfn(x) - lam
        out[:, 0] = z[:, 1] - mu_signed * z[:, 0]
        out[:, 1] = qv * z[:, 0] - mu_signed * z[:, 1]
        if nu_max:
            out[1:, 1] -= z[:-1, 0]
        return out.ravel()

    return rhs


def solve_chain(
    problem: Problem,
    lam: complex,
    *,
    nu_max: int = 0,
    side: str = "left",
    bc: str = "auto",
    x_from: float | None = None,
    x_to: float | None = None,
    init: np.ndarray | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> ChainSolution:
    """Integrate the chain across ``[0, pi]`` (or a sub-interval).

    ``side='left'`` starts at 0 from the Robin data ``(1, h)``;
    ``side='right'`` starts at pi from ``(1, -H)`` (Robin) or ``(0, 1)``
    (the Dirichlet-normalized solution, also used when ``bc='dirichlet'``).
    Explicit ``init`` (shape ``(nu_max+1, 2)``) overrides both.
    """

    if side == "left":
        a = 0.0 if x_from is None else x_from
        b = math.pi if x_to is None else x_to
        if init is None:
            init = np.zeros((nu_max + 1, 2), dtype=complex)
            init[0] = (1.0, problem.h)
    else:
        a = math.pi if x_from is None else x_from
        b = 0.0 if x_to is None else x_to
        if init is None:
            init = np.zeros((nu_max + 1, 2), dtype=complex)
            use_dirichlet = bc == "dirichlet" or (bc == "auto" and problem.dirichlet)
            init[0] = (0.0, 1.0) if use_dirichlet else (1.0, -problem.H)
    mu = growth_rate(lam)
    direction = 1.0 if b >= a else -1.0
    qx = problem.q
    path = _ordered_breaks(a, b, [problem.d] + qx.breakpoints())
    rhs_cache = {}
    segments = []
    z = np.asarray(init, dtype=complex).reshape(nu_max + 1, 2).copy()
    for lo, hi in zip(path, path[1:]):
        xin, xax = min(lo, hi), max(lo, hi)
        qfn = qx.piece_fn(xin, xax)
        key = id(qfn)
        if key not in rhs_cache:
            rhs_cache[key] = _chain_rhs(qfn, lam, direction * mu, nu_max)
        sol = solve_ivp(
            rhs_cache[key],
            (lo, hi),
            z.ravel(),
            method="DOP853",
            dense_output=True,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise RuntimeError(f"integration failed on [{lo}, {hi}]: {sol.message}")
        segments.append(_Segment(lo, hi, sol.sol))
        z = sol.y[:, -1].reshape(nu_max + 1, 2).copy()
        if abs(hi - problem.d) < 1e-12 and abs(hi - b) > 1e-12:
            if direction > 0:
                z = jump_forward(z, problem.beta, problem.gamma)
            else:
                z = jump_backward(z, problem.beta, problem.gamma)
    return ChainSolution(problem, lam, nu_max, a, b, segments, mu)


# ---------------------------------------------------------------------------
# Batched solve over many lambda (final state only)
# ---------------------------------------------------------------------------


def solve_many(
    problem: Problem,
    lams: np.ndarray,
    *,
    side: str = "left",
    rtol: float = 1e-9,
    atol: float = 1e-11,
):
    """Base solution for a batch of lambda values in a single integration.

    Returns ``(states, logs)`` where ``states`` has shape ``(n, 2)`` holding
    the scaled ``(y, y')`` at the far end and ``logs`` the per-lambda scale
    exponents.  Used by the zero-counting machinery where many
    characteristic-function samples are needed at once.
    """

    lams = np.asarray(lams, dtype=complex)
    mus = np.abs(np.sqrt(lams).imag)
    if side == "left":
        a, b = 0.0, math.pi
        init = np.empty((lams.size, 2), dtype=complex)
        init[:, 0] = 1.0
        init[:, 1] = problem.h
    else:
        a, b = math.pi, 0.0
        init = np.empty((lams.size, 2), dtype=complex)
        if problem.dirichlet:
            init[:, 0] = 0.0
            init[:, 1] = 1.0
        else:
            init[:, 0] = 1.0
            init[:, 1] = -problem.H
    direction = 1.0 if b >= a else -1.0
    mu_signed = direction * mus
    qx = problem.q
    path = _ordered_breaks(a, b, [problem.d] + qx.breakpoints())
    z = init.copy()
    for lo, hi in zip(path, path[1:]):
        qfn = qx.piece_fn(min(lo, hi), max(lo, hi))

        def rhs(x, flat, qfn=qfn):
            zz = flat.reshape(-1, 2)
            out = np.empty_like(zz)
            out[:, 0] = zz[:, 1] - mu_signed * zz[:, 0]
            out[:, 1] = (qfn(x) - lams) * zz[:, 0] - mu_signed * zz[:, 1]
            return out.ravel()

        sol = solve_ivp(
            rhs, (lo, hi), z.ravel(), method="DOP853", rtol=rtol, atol=atol
        )
        if not sol.success:
            raise RuntimeError(f"integration failed on [{lo}, {hi}]: {sol.message}")
        z = sol.y[:, -1].reshape(-1, 2).copy()
        if abs(hi - problem.d) < 1e-12 and abs(hi - b) > 1e-12:
            if direction > 0:
                z = jump_forward(z, problem.beta, problem.gamma)
            else:
                z = jump_backward(z, problem.beta, problem.gamma)
    return z, mus * math.pi


# ---------------------------------------------------------------------------
# Fundamental pair on a sub-interval
# ---------------------------------------------------------------------------


def fundamental_pair(
    problem: Problem,
    lam: complex,
    r: float,
    x0: float,
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> tuple[ChainSolution, ChainSolution]:
    """Solutions ``y1, y2`` on ``[r, x0]`` with ``y1(r)=1, y1'(r)=0`` and
    ``y2(r)=0, y2'(r)=1`` (matching at ``d`` applied if it lies inside)."""

    init1 = np.array([[1.0, 0.0]], dtype=complex)
    init2 = np.array([[0.0, 1.0]], dtype=complex)
    y1 = solve_chain(
        problem, lam, side="left", x_from=r, x_to=x0, init=init1, rtol=rtol, atol=atol
    )
    y2 = solve_chain(
        problem, lam, side="left", x_from=r, x_to=x0, init=init2, rtol=rtol, atol=atol
    )
    return y1, y2


def wronskian_check(
    problem: Problem,
    lam: complex,
    r: float = 0.0,
    x0: float = math.pi,
    n_samples: int = 7,
    *,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> float:
    """Max deviation of ``y1 y2' - y1' y2`` from 1 over a sample grid.

    The bracket of the fundamental pair is exactly 1 at ``r`` and is
    conserved by both the equation and the matching conditions, so this is
    an end-to-end consistency check of the integrator.
    """

    y1, y2 = fundamental_pair(problem, lam, r, x0, rtol=rtol, atol=atol)
    worst = 0.0
    for x in np.linspace(r, x0, n_samples):
        s1 = y1.state(float(x))
        s2 = y2.state(float(x))
        w = s1[0, 0] * s2[0, 1] - s1[0, 1] * s2[0, 0]
        w_actual = w * math.exp(2 * y1.logscale(float(x)))
        worst = max(worst, abs(w_actual - 1.0))
    return worst


# ---------------------------------------------------------------------------
# Paired solves with accumulated bilinear integrals
# ---------------------------------------------------------------------------


@dataclass
class PairResult:
    states_a: np.ndarray  # (n_a, 2) scaled end states
    states_b: np.ndarray
    end_logscale: float  # log scale of each solution at x_to
    integrals: list[ScaledVal]  # accumulated bracket integrals


def pair_integrals(
    prob_a: Problem,
    prob_b: Problem,
    lam: complex,
    x_from: float,
    x_to: float,
    init_a: np.ndarray,
    init_b: np.ndarray,
    pairs: Sequence[tuple[int, int]],
    *,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> PairResult:
    """Advance solutions of two problems together, accumulating for each
    requested column pair ``(i, j)`` the bracket increment

        W_ij(x_to) - W_ij(x_from),   W_ij = yA_i yB_j' - yA_i' yB_j,

    which satisfies ``W' = (qB - qA) yA yB`` away from ``d`` plus the jump
    contribution at ``d``.  The accumulators are returned with scale
    ``exp(2 mu (x_to - x_from))`` factored out, i.e. already normalized the
    way ray-decay diagnostics need them.  Requires ``d`` to coincide
    (forward direction only)."""

    if abs(prob_a.d - prob_b.d) > 1e-12:
        raise ValueError("paired problems must share the discontinuity point")
    if not x_to > x_from:
        raise ValueError("pair_integrals integrates left to right")
    mu = growth_rate(lam)
    na = init_a.shape[0]
    nb = init_b.shape[0]
    npair = len(pairs)
    qa_x = prob_a.q
    qb_x = prob_b.q
    d = prob_a.d
    pts = [d] + qa_x.breakpoints() + qb_x.breakpoints()
    path = _ordered_breaks(x_from, x_to, pts)
    ia = np.array([p[0] for p in pairs], dtype=int)
    ib = np.array([p[1] for p in pairs], dtype=int)

    za = np.asarray(init_a, dtype=complex).reshape(na, 2).copy()
    zb = np.asarray(init_b, dtype=complex).reshape(nb, 2).copy()
    acc = np.zeros(npair, dtype=complex)

    def bracket(za_, zb_):
        return za_[ia, 0] * zb_[ib, 1] - za_[ia, 1] * zb_[ib, 0]

    for lo, hi in zip(path, path[1:]):
        qa = qa_x.piece_fn(lo, hi)
        qb = qb_x.piece_fn(lo, hi)

        def rhs(x, flat, qa=qa, qb=qb):
            za_ = flat[: 2 * na].reshape(na, 2)
            zb_ = flat[2 * na : 2 * na + 2 * nb].reshape(nb, 2)
            qav = qa(x)
            qbv = qb(x)
            out = np.empty_like(flat)
            oa = out[: 2 * na].reshape(na, 2)
            ob = out[2 * na : 2 * na + 2 * nb].reshape(nb, 2)
            oa[:, 0] = za_[:, 1] - mu * za_[:, 0]
            oa[:, 1] = (qav - lam) * za_[:, 0] - mu * za_[:, 1]
            ob[:, 0] = zb_[:, 1] - mu * zb_[:, 0]
            ob[:, 1] = (qbv - lam) * zb_[:, 0] - mu * zb_[:, 1]
            weight = math.exp(-2.0 * mu * (x_to - x)) if mu * (x_to - x) < 350 else 0.0
            out[2 * na + 2 * nb :] = (
                (qbv - qav) * weight * za_[ia, 0] * zb_[ib, 0]
            )
            return out

        flat = np.concatenate([za.ravel(), zb.ravel(), acc])
        sol = solve_ivp(rhs, (lo, hi), flat, method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"integration failed on [{lo}, {hi}]: {sol.message}")
        flat = sol.y[:, -1]
        za = flat[: 2 * na].reshape(na, 2).copy()
        zb = flat[2 * na : 2 * na + 2 * nb].reshape(nb, 2).copy()
        acc = flat[2 * na + 2 * nb :].copy()
        if abs(hi - d) < 1e-12 and abs(hi - x_to) > 1e-12:
            before = bracket(za, zb)
            za = jump_forward(za, prob_a.beta, prob_a.gamma)
            zb = jump_forward(zb, prob_b.beta, prob_b.gamma)
            after = bracket(za, zb)
            weight = math.exp(-2.0 * mu * (x_to - d)) if mu * (x_to - d) < 350 else 0.0
            acc = acc + (after - before) * weight
    log_end = 2.0 * mu * (x_to - x_from)
    integrals = [ScaledVal(complex(v), log_end) for v in acc]
    return PairResult(za, zb, mu * (x_to - x_from), integrals)
