"""Exact finite distributions and (eps, delta)-closeness primitives.

Everything on the verification path is a ``fractions.Fraction``. The privacy
parameter is carried as the scale ``u = e^eps`` so that no transcendental
function is ever evaluated; ``eps = ln(u)`` is derived for display only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .errors import InvariantViolation, SupportMismatchError, UnboundedEpsilonError

__all__ = [
    "FiniteDist",
    "PrivacyParams",
    "parse_rational",
    "format_rational",
    "as_prob",
    "hockey_stick",
    "hockey_stick_pairs",
    "indistinguishable",
    "least_scale",
    "min_eps_for_delta",
    "eps_from_scale",
]


def parse_rational(text: str) -> Fraction:
    """Parse ``"num/den"`` (or a bare integer / decimal) into a Fraction."""
    if not isinstance(text, str):
        raise InvariantViolation(f"expected rational string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InvariantViolation(f"malformed rational {text!r}") from exc


def format_rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def as_prob(x) -> Fraction:
    """Coerce to Fraction and check it lies in [0, 1]."""
    if isinstance(x, str):
        x = parse_rational(x)
    elif isinstance(x, float):
        raise InvariantViolation(f"float {x!r} is not an exact probability")
    x = Fraction(x)
    if x < 0 or x > 1:
        raise InvariantViolation(f"probability {x} outside [0, 1]")
    return x


def eps_from_scale(u) -> float:
    return math.log(u)


@dataclass(frozen=True)
class FiniteDist:
    """Normalized distribution over an ordered tuple of hashable outcomes.

    Zero-mass outcomes are allowed and kept, so two laws produced from the
    same mechanism share their support structurally.
    """

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(self.support)
        probs = tuple(as_prob(p) for p in self.probs)
        if len(support) != len(probs):
            raise InvariantViolation("support and probs differ in length")
        if len(set(support)) != len(support):
            raise InvariantViolation(f"duplicate outcome in support {support!r}")
        total = sum(probs, Fraction(0))
        if total != 1:
            raise InvariantViolation(f"masses sum to {total}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dict(cls, masses: Mapping[Hashable, object]) -> "FiniteDist":
        return cls(tuple(masses), tuple(masses.values()))

    @classmethod
    def point(cls, outcome) -> "FiniteDist":
        return cls((outcome,), (Fraction(1),))

    @classmethod
    def uniform(cls, outcomes: Iterable) -> "FiniteDist":
        outcomes = tuple(outcomes)
        return cls(outcomes, (Fraction(1, len(outcomes)),) * len(outcomes))

    def __len__(self):
        return len(self.support)

    def items(self):
        return zip(self.support, self.probs)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def mass(self, outcome) -> Fraction:
        try:
            return self.probs[self.support.index(outcome)]
        except ValueError:
            raise KeyError(outcome) from None

    def prob_of(self, event: Iterable) -> Fraction:
        d = self.as_dict()
        return sum((d[y] for y in set(event)), Fraction(0))

    def map(self, fn: Callable) -> "FiniteDist":
        """Push forward through a deterministic function (post-processing)."""
        out: dict = {}
        for y, p in self.items():
            z = fn(y)
            out[z] = out.get(z, Fraction(0)) + p
        return FiniteDist.from_dict(out)

    def aligned(self, other: "FiniteDist") -> tuple[list[Fraction], list[Fraction]]:
        """Masses of self and other listed in self's support order."""
        if set(self.support) != set(other.support):
            raise SupportMismatchError(
                f"supports differ: {sorted(map(repr, set(self.support) ^ set(other.support)))}"
            )
        od = other.as_dict()
        return list(self.probs), [od[y] for y in self.support]


@dataclass(frozen=True)
class PrivacyParams:
    eps: float | Fraction
    delta: Fraction = Fraction(0)

    def __post_init__(self):
        if self.eps < 0:
            raise InvariantViolation(f"eps must be nonnegative, got {self.eps}")
        object.__setattr__(self, "delta", as_prob(self.delta))


def hockey_stick_pairs(p: Sequence, q: Sequence, scale) -> Fraction:
    """sum_y max(p_y - scale * q_y, 0) over aligned mass lists."""
    total = 0
    for a, b in zip(p, q):
        d = a - scale * b
        if d > 0:
            total += d
    return total


def hockey_stick(p: FiniteDist, q: FiniteDist, scale) -> Fraction:
    """Least delta with p(T) <= scale * q(T) + delta for every event T."""
    pp, qq = p.aligned(q)
    return Fraction(hockey_stick_pairs(pp, qq, Fraction(scale)))


def indistinguishable(p: FiniteDist, q: FiniteDist, scale, delta) -> bool:
    delta = as_prob(delta)
    return hockey_stick(p, q, scale) <= delta and hockey_stick(q, p, scale) <= delta


def least_scale(p: Sequence, q: Sequence, delta):
    """Least u >= 1 with sum max(p - u q, 0) <= delta (one direction).

    The left side is piecewise linear and nonincreasing in u with kinks at the
    likelihood ratios p/q, so the answer is found by walking the ratios in
    decreasing order and solving the active linear piece. Works for any
    ordered field (Fraction for exact answers, float for bound solving).
    """
    inf_mass = 0
    groups: dict = {}
    for a, b in zip(p, q):
        if b == 0:
            inf_mass += a
        elif a > b:
            r = a / b
            ga, gb = groups.get(r, (0, 0))
            groups[r] = (ga + a, gb + b)
    if inf_mass > delta:
        raise UnboundedEpsilonError(
            f"mass {inf_mass} on outcomes impossible under the other input exceeds delta={delta}"
        )
    big_p, big_q = inf_mass, 0
    for r in sorted(groups, reverse=True):
        if big_p - r * big_q > delta:
            return (big_p - delta) / big_q
        ga, gb = groups[r]
        big_p += ga
        big_q += gb
    if big_p - big_q <= delta:
        return 1
    return (big_p - delta) / big_q


def min_eps_for_delta(p: FiniteDist, q: FiniteDist, delta) -> Fraction:
    """Least scale u = e^eps making p and q (eps, delta)-indistinguishable."""
    delta = as_prob(delta)
    if delta >= 1:
        raise InvariantViolation("delta must be < 1")
    pp, qq = p.aligned(q)
    u = max(least_scale(pp, qq, delta), least_scale(qq, pp, delta))
    return Fraction(u)
