"""Eigenvalue location by argument-principle counting plus Newton polish.

``delta`` is entire of order 1/2, so a rectangle count via the winding
number of its boundary values is exact once the boundary sampling resolves
the phase (every step below pi/2).  Rectangles are subdivided until each
leaf holds an isolated cluster, Newton iteration (using the chain
derivative, no finite differences) pins the root, and a small-circle
winding count gives the algebraic multiplicity.  The counting pass uses
relaxed integrator tolerances and batched solves; only the polish runs at
full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charfn import char_delta, delta_many
from .problem import Problem

_PHASE_LIMIT = 0.5 * math.pi


class ZeroOnContour(RuntimeError):
    """A contour sample fell (numerically) on a zero; the caller should
    nudge the contour and retry."""


@dataclass(frozen=True)
class EigenRecord:
    lam: complex
    multiplicity: int
    residual: float  # |delta| at the root, relative to the local scale


@dataclass
class ZeroSequence:
    """A multiset of zeros with multiplicities (computed or synthetic)."""

    zeros: np.ndarray
    mults: np.ndarray
    origin: str = "computed"

    def __post_init__(self):
        self.zeros = np.asarray(self.zeros, dtype=complex)
        self.mults = np.asarray(self.mults, dtype=int)

    @classmethod
    def from_records(cls, records, origin="computed"):
        return cls(
            np.array([r.lam for r in records], dtype=complex),
            np.array([r.multiplicity for r in records], dtype=int),
            origin,
        )

    def counting(self, t: float) -> int:
        return int(self.mults[np.abs(self.zeros) <= t].sum())

    def merged(self, other: "ZeroSequence") -> "ZeroSequence":
        return ZeroSequence(
            np.concatenate([self.zeros, other.zeros]),
            np.concatenate([self.mults, other.mults]),
            origin="merged",
        )

    def __len__(self):
        return len(self.zeros)


def counting_function(seq: ZeroSequence, t: float) -> int:
    """Number of zeros with ``|lam| <= t`` counted with multiplicity."""

    return seq.counting(t)


# ---------------------------------------------------------------------------
# Winding counts along closed paths
# ---------------------------------------------------------------------------


class _Cache:
    """Memoized batched evaluation of a complex function."""

    def __init__(self, f_batch):
        self.f_batch = f_batch
        self.store: dict[complex, complex] = {}

    def __call__(self, pts):
        missing = [p for p in pts if p not in self.store]
        if missing:
            vals = self.f_batch(np.array(missing, dtype=complex))
            for p, v in zip(missing, vals):
                self.store[p] = complex(v)
        return np.array([self.store[p] for p in pts], dtype=complex)


def _refine_until_resolved(cache, pts, max_depth=26):
    """Insert midpoints until all phase steps are below pi/2; return the
    resulting points, values and total winding."""

    pts = list(pts)
    vals = cache(pts)
    for depth in range(max_depth):
        mags = np.abs(vals)
        neighbor = np.maximum(np.roll(mags, 1), np.roll(mags, -1))
        if np.any(mags <= 1e-10 * neighbor):
            raise ZeroOnContour("sample magnitude collapse on contour")
        steps = np.angle(vals[1:] / vals[:-1])
        bad = set(np.nonzero(np.abs(steps) >= _PHASE_LIMIT)[0])
        if not bad:
            return pts, vals, int(round(steps.sum() / (2 * math.pi)))
        new_pts = []
        for i, p in enumerate(pts[:-1]):
            new_pts.append(p)
            if i in bad:
                new_pts.append(0.5 * (pts[i] + pts[i + 1]))
        new_pts.append(pts[-1])
        pts = new_pts
        vals = cache(pts)
    raise ZeroOnContour("phase refinement did not converge (zero near contour?)")


def _winding_closed(cache, pts, max_depth=26, verify_passes=3):
    """Winding number of f along the closed polyline ``pts`` (pts[0] ==
    pts[-1]).

    Midpoints are inserted until every phase step is below pi/2; since a
    bounded step can still hide a silent extra turn of 2 pi on a coarse
    segment, at least one global halving pass must then leave the count
    unchanged before it is accepted.
    """

    pts, vals, winding = _refine_until_resolved(cache, pts, max_depth)
    for _ in range(verify_passes):
        halved = []
        for a, b in zip(pts[:-1], pts[1:]):
            halved.append(a)
            halved.append(0.5 * (a + b))
        halved.append(pts[-1])
        pts, vals, new_winding = _refine_until_resolved(cache, halved, max_depth)
        if new_winding == winding:
            return winding
        winding = new_winding
    raise ZeroOnContour("winding count failed to stabilize under refinement")


def _rect_path(re_lo, re_hi, im_lo, im_hi, n_re, n_im):
    top, bottom = [], []
    left, right = [], []
    res = np.linspace(re_lo, re_hi, n_re + 1)
    ims = np.linspace(im_lo, im_hi, n_im + 1)
    path = (
        [complex(r, im_lo) for r in res]
        + [complex(re_hi, i) for i in ims[1:]]
        + [complex(r, im_hi) for r in res[::-1][1:]]
        + [complex(re_lo, i) for i in ims[::-1][1:]]
    )
    return path


def count_zeros(
    f_batch,
    rect,
    *,
    n_re: int | None = None,
    n_im: int | None = None,
) -> int:
    """Number of zeros (with multiplicity) of an analytic function inside an
    axis-aligned rectangle ``(re_lo, re_hi, im_lo, im_hi)``."""

    cache = f_batch if isinstance(f_batch, _Cache) else _Cache(f_batch)
    re_lo, re_hi, im_lo, im_hi = rect
    if n_re is None:
        # sample density follows the phase rate ~ pi * d(sqrt|lam|)/d(Re lam)
        span = abs(math.sqrt(abs(re_hi)) - math.sqrt(abs(re_lo))) + (
            math.sqrt(abs(re_hi)) + math.sqrt(abs(re_lo))
            if re_lo < 0 < re_hi
            else 0.0
        )
        n_re = max(8, int(2.5 * span) + 4)
    if n_im is None:
        n_im = max(6, int(0.35 * (im_hi - im_lo)))
    path = _rect_path(re_lo, re_hi, im_lo, im_hi, n_re, n_im)
    return _winding_closed(cache, path)


def multiplicity_probe(
    f_batch,
    lam0: complex,
    radius: float = 2e-2,
    *,
    check_shrink: bool = True,
) -> int:
    """Zero order of an analytic function at ``lam0`` by circle winding,
    cross-checked at half the radius."""

    cache = f_batch if isinstance(f_batch, _Cache) else _Cache(f_batch)

    def circle(r):
        n = 16
        pts = [lam0 + r * np.exp(2j * math.pi * k / n) for k in range(n)]
        pts.append(pts[0])
        return _winding_closed(cache, pts)

    m = circle(radius)
    if check_shrink:
        m2 = circle(0.5 * radius)
        if m2 != m:
            raise ZeroOnContour(
                f"multiplicity unstable under radius shrink: {m} vs {m2}"
            )
    return m


# ---------------------------------------------------------------------------
# Eigenvalue search
# ---------------------------------------------------------------------------


def _problem_batch(problem: Problem, rtol=1e-8, atol=1e-10):
    def f_batch(lams):
        vals, _, _ = delta_many(problem, lams, rtol=rtol, atol=atol)
        return vals

    return f_batch


def _newton(problem: Problem, lam0: complex, *, mult_hint: int = 1, maxit: int = 60):
    """Newton iteration on ``delta`` with the chain derivative.

    Runs at relaxed integrator tolerance until the step is small, then
    polishes with tight tolerance; ``mult_hint`` scales the step for known
    multiple roots (plain Newton is only linearly convergent there).
    """

    lam = complex(lam0)
    m = max(1, mult_hint)
    last_step = math.inf
    coarse = True
    polish_left = 2
    sample = None
    for _ in range(maxit):
        if coarse:
            sample = char_delta(problem, lam, nu_max=1, rtol=1e-7, atol=1e-9)
        else:
            sample = char_delta(problem, lam, nu_max=1, rtol=1e-11, atol=1e-13)
        d0, d1 = sample.ddelta[0], sample.ddelta[1]
        if d1.val == 0:
            break
        step = (d0 / d1).value
        lam = lam - m * step
        last_step = abs(step)
        if coarse:
            if last_step < 1e-5 * (1.0 + abs(lam)):
                coarse = False
        else:
            polish_left -= 1
            if last_step < 5e-13 * (1.0 + abs(lam)) or polish_left <= 0:
                break
    return lam, last_step, sample


def find_eigenvalues(
    problem: Problem,
    modulus_bound: float,
    *,
    im_halfwidth: float = 50.0,
    leaf_size: float = 2.0,
    count_rtol: float = 3e-7,
) -> list[EigenRecord]:
    """All eigenvalues with ``|lam| < modulus_bound``, with multiplicities.

    The search strip is ``[-B - margin, B + margin] x [-c, c]``; eigenvalues
    of the problems treated here lie in a horizontal strip, so the default
    half-width is generous for moderate data.  The total leaf count is
    reconciled against the outer-rectangle winding count, so dropped or
    doubled roots are detected rather than silently returned.
    """

    B = float(modulus_bound)
    cache = _Cache(_problem_batch(problem, rtol=count_rtol, atol=count_rtol * 1e-2))
    c = min(im_halfwidth, B + 1.0)
    outer = (-B - 0.372, B + 0.413, -c - 0.0931, c + 0.1043)

    for attempt in range(4):
        try:
            total = count_zeros(cache, outer)
            break
        except ZeroOnContour:
            outer = (
                outer[0] - 0.311,
                outer[1] + 0.297,
                outer[2] - 0.151,
                outer[3] + 0.143,
            )
    else:
        raise RuntimeError("could not find a clean outer contour")

    # Slice the strip at sqrt-spaced cuts (between the typical eigenvalue
    # positions ~ (n + delta)^2) so most slices isolate one root right away;
    # binary subdivision below only has to clean up collisions.
    def slice_counts(offset):
        cuts = [outer[0]]
        n = 0
        while (n + offset) ** 2 < outer[1] - 1.0:
            cuts.append((n + offset) ** 2)
            n += 1
        cuts.append(outer[1])
        counts = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            counts.append(count_zeros(cache, (a, b, outer[2], outer[3])))
        return cuts, counts

    for offset in (0.231, 0.367, 0.149, 0.4511):
        try:
            cuts, counts = slice_counts(offset)
            break
        except ZeroOnContour:
            continue
    else:
        cuts, counts = [outer[0], outer[1]], [total]
    if sum(counts) != total:
        raise RuntimeError(
            f"slice counts {sum(counts)} disagree with outer count {total}"
        )

    roots: list[tuple[complex, int]] = []

    def subdivide(rect, count, depth=0):
        if count == 0:
            return
        re_lo, re_hi, im_lo, im_hi = rect
        w, hgt = re_hi - re_lo, im_hi - im_lo
        if count <= 3 or max(w, hgt) <= leaf_size or depth > 40:
            if _resolve_leaf(rect, count):
                return
            if max(w, hgt) <= 1e-3 or depth > 40:
                raise RuntimeError(
                    f"leaf {rect}: could not resolve {count} zeros"
                )
            # fall through and keep splitting this box
        if w >= hgt:
            mid = re_lo + w * 0.5
            jitter = 1.9e-3 * w
            for off in (0.0, jitter, -jitter, 2.7 * jitter):
                try:
                    r1 = (re_lo, mid + off, im_lo, im_hi)
                    r2 = (mid + off, re_hi, im_lo, im_hi)
                    c1 = count_zeros(cache, r1)
                    c2 = count_zeros(cache, r2)
                    break
                except ZeroOnContour:
                    continue
            else:
                raise RuntimeError("subdivision kept hitting zeros on contours")
        else:
            mid = im_lo + hgt * 0.5
            jitter = 1.9e-3 * hgt
            for off in (0.0, jitter, -jitter, 2.7 * jitter):
                try:
                    r1 = (re_lo, re_hi, im_lo, mid + off)
                    r2 = (re_lo, re_hi, mid + off, im_hi)
                    c1 = count_zeros(cache, r1)
                    c2 = count_zeros(cache, r2)
                    break
                except ZeroOnContour:
                    continue
            else:
                raise RuntimeError("subdivision kept hitting zeros on contours")
        if c1 + c2 != count:
            raise RuntimeError(
                f"winding counts inconsistent: {count} != {c1}+{c2} on {rect}"
            )
        subdivide(r1, c1, depth + 1)
        subdivide(r2, c2, depth + 1)

    def _resolve_leaf(rect, count) -> bool:
        re_lo, re_hi, im_lo, im_hi = rect
        margin = 1e-7 * (1.0 + max(re_hi - re_lo, im_hi - im_lo))

        def inside(z):
            return (
                re_lo - margin <= z.real <= re_hi + margin
                and im_lo - margin <= z.imag <= im_hi + margin
            )

        found_here = sum(
            m
            for r, m, _ in roots
            if re_lo - 1e-9 <= r.real <= re_hi + 1e-9
            and im_lo - 1e-9 <= r.imag <= im_hi + 1e-9
        )
        starts = [
            complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)),
            complex(re_lo + 0.3 * (re_hi - re_lo), im_lo + 0.3 * (im_hi - im_lo)),
            complex(re_lo + 0.7 * (re_hi - re_lo), im_lo + 0.62 * (im_hi - im_lo)),
        ]
        for start in starts:
            if found_here >= count:
                break
            lam, _, sample = _newton(problem, start)
            if not inside(lam):
                continue
            if any(abs(lam - r) < 2e-5 * (1 + abs(lam)) for r, _, _ in roots):
                continue
            if count == 1:
                # the leaf winding already pins the zero order
                mult = 1
            else:
                radius = min(0.02 * (1 + abs(lam)) ** 0.25, 0.45 * leaf_size)
                try:
                    mult = multiplicity_probe(cache, lam, radius, check_shrink=False)
                except ZeroOnContour:
                    mult = multiplicity_probe(
                        cache, lam, radius * 1.37, check_shrink=False
                    )
                if mult == 0:
                    continue
            if mult > 1:
                lam, _, sample = _newton(problem, lam, mult_hint=mult, maxit=10)
            roots.append((lam, mult, sample))
            found_here += mult
        return found_here == count

    for (a, b), cnt in zip(zip(cuts[:-1], cuts[1:]), counts):
        subdivide((a, b, outer[2], outer[3]), cnt)

    records = []
    for lam, mult, sample in roots:
        if abs(lam) >= B:
            continue
        if mult > 1 or sample is None:
            sample = char_delta(problem, lam, nu_max=mult)
        scale = abs(sample.ddelta[mult].val) + 1e-300
        residual = (abs(sample.delta.val) / scale) ** (1.0 / mult)
        records.append(EigenRecord(lam=lam, multiplicity=mult, residual=residual))
    records.sort(key=lambda r: (abs(r.lam), r.lam.real))
    total_inside = sum(r.multiplicity for r in records)
    outside = sum(m for lam, m, _ in roots if abs(lam) >= B)
    if total_inside + outside != total:
        raise RuntimeError("lost track of zeros during refinement")
    return records


def find_dirichlet_eigenvalues(problem: Problem, modulus_bound: float, **kw):
    """Zeros of ``delta_inf`` (the Dirichlet-variant spectrum)."""

    return find_eigenvalues(problem.dirichlet_variant(), modulus_bound, **kw)
