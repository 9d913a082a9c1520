"""Problem data for the discontinuous Sturm-Liouville operator.

The differential expression is ``-y'' + q(x) y`` on ``(0, pi)`` with

* a Robin condition ``y'(0) - h y(0) = 0`` at the left end,
* either ``y'(pi) + H y(pi) = 0`` (Robin) or ``y(pi) = 0`` (Dirichlet) at
  the right end, and
* interior matching at ``x = d``::

      y(d+0) = beta * y(d-0)
      y'(d+0) = y'(d-0) / beta + gamma * y(d-0)

``beta`` is real positive while ``h``, ``H`` and ``gamma`` may be complex,
so the operator is in general non-self-adjoint.  The Dirichlet right end is
a distinct variant, not a limiting value of ``H``; it is tagged explicitly
(``H=None``) and never encoded as an infinite float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .expr import PotentialExpr

DIRICHLET = None  # sentinel spelling for the right-end variant


@dataclass(frozen=True)
class Problem:
    q: PotentialExpr
    h: complex = 0.0
    H: Optional[complex] = 0.0  # None selects the Dirichlet variant
    beta: float = 1.0
    gamma: complex = 0.0
    d: float = math.pi / 2

    def __post_init__(self):
        if isinstance(self.q, str) or isinstance(self.q, list):
            object.__setattr__(self, "q", PotentialExpr.from_spec(self.q))
        beta = self.beta
        if isinstance(beta, complex):
            if beta.imag != 0:
                raise ValueError("beta must be real")
            beta = beta.real
        if not beta > 0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "beta", float(beta))
        if not 0 < self.d < math.pi:
            raise ValueError("d must lie strictly inside (0, pi)")
        object.__setattr__(self, "h", complex(self.h))
        object.__setattr__(self, "gamma", complex(self.gamma))
        if self.H is not None:
            object.__setattr__(self, "H", complex(self.H))

    @property
    def dirichlet(self) -> bool:
        return self.H is None

    @property
    def b1(self) -> float:
        return 0.5 * (self.beta + 1.0 / self.beta)

    @property
    def b2(self) -> float:
        return 0.5 * (self.beta - 1.0 / self.beta)

    def with_(self, **changes) -> "Problem":
        """Copy with replaced fields (H=None switches to Dirichlet)."""

        data = {
            "q": self.q,
            "h": self.h,
            "H": self.H,
            "beta": self.beta,
            "gamma": self.gamma,
            "d": self.d,
        }
        data.update(changes)
        return Problem(**data)

    def robin_variant(self, H: complex = 0.0) -> "Problem":
        return self.with_(H=H)

    def dirichlet_variant(self) -> "Problem":
        return self.with_(H=DIRICHLET)

    def to_dict(self) -> dict:
        return {
            "q": self.q.to_spec(),
            "h": _c(self.h),
            "H": "dirichlet" if self.dirichlet else _c(self.H),
            "beta": self.beta,
            "gamma": _c(self.gamma),
            "d": self.d,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Problem":
        def grab(key, default):
            return data.get(key, default)

        H = grab("H", 0.0)
        if isinstance(H, str):
            if H.lower() != "dirichlet":
                raise ValueError(f"H must be a number or 'dirichlet', got {H!r}")
            H = DIRICHLET
        elif H is not None:
            H = _parse_c(H)
        return cls(
            q=PotentialExpr.from_spec(grab("q", "0")),
            h=_parse_c(grab("h", 0.0)),
            H=H,
            beta=float(grab("beta", 1.0)),
            gamma=_parse_c(grab("gamma", 0.0)),
            d=float(grab("d", math.pi / 2)),
        )


def _c(z: complex):
    z = complex(z)
    if z.imag == 0:
        return z.real
    return [z.real, z.imag]


def _parse_c(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    if isinstance(value, str):
        return complex(value.replace("i", "j"))
    return complex(value)
