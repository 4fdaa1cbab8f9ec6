"""Exact-rational Farey-tree coding and forward itineraries.

The real line is split into unit intervals ``(k, k+1)``; each interval is
subdivided into infinitely many children indexed by the integers via the
mediant recursion

    p0/q0 = (a + c)/(b + d),
    p_n/q_n = (p_{n-1} + c)/(q_{n-1} + d),
    p_{-n}/q_{-n} = (p_{-n+1} + a)/(q_{-n+1} + b),

with child ``j`` the interval ``(p_j, p_{j+1})``.  Iterating the
subdivision assigns every irrational a unique integer sequence; all
endpoint arithmetic is exact (``fractions.Fraction``), and a target that
hits an endpoint raises instead of being silently perturbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BoundaryAmbiguityError,
    DomainError,
    LeftJuliaShadowError,
    RangeOverflowError,
    RationalCollisionError,
)
from .geometry import fold
from .zorich import MAX_HEIGHT, Params, zorich_eval

# An orbit point closer than this to a cell wall gets no symbol.
BOUNDARY_ATOL = 1e-9


@dataclass(frozen=True)
class FareyInterval:
    """Open interval with exact rational endpoints in lowest terms."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not self.lo < self.hi:
            raise DomainError("interval endpoints must satisfy lo < hi")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        value = Fraction(value)
        return self.lo < value < self.hi

    def strictly_inside(self, other: "FareyInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi and self != other


def _endpoint(j: int, a: int, b: int, c: int, d: int) -> tuple[int, int]:
    """j-th subdivision point of (a/b, c/d): closed form of the mediant walk."""
    p0, q0 = a + c, b + d
    if j >= 0:
        return p0 + j * c, q0 + j * d
    return p0 - j * a, q0 - j * b


def farey_child(interval: FareyInterval, j: int) -> FareyInterval:
    """Child ``j`` of an interval under the mediant subdivision."""
    a, b = interval.lo.numerator, interval.lo.denominator
    c, d = interval.hi.numerator, interval.hi.denominator
    pl, ql = _endpoint(j, a, b, c, d)
    pr, qr = _endpoint(j + 1, a, b, c, d)
    return FareyInterval(Fraction(pl, ql), Fraction(pr, qr))


def _child_index(interval: FareyInterval, target: Fraction) -> int:
    """Index of the child containing the target, by exact comparison.

    Raises :class:`RationalCollisionError` when the target is one of the
    subdivision points.
    """
    a, b = interval.lo.numerator, interval.lo.denominator
    c, d = interval.hi.numerator, interval.hi.denominator
    p0 = Fraction(a + c, b + d)
    if target == p0:
        raise RationalCollisionError(f"target {target} is a subdivision endpoint")
    if target > p0:
        # p_j < target  <=>  j < (target*q0 - p0_num) / (c - target*d)
        jstar = (target * (b + d) - (a + c)) / (c - target * d)
        if jstar.denominator == 1:
            raise RationalCollisionError(f"target {target} is a subdivision endpoint")
        j = math.floor(jstar)
    else:
        # p_{-m} < target  <=>  m > mstar
        mstar = ((a + c) - target * (b + d)) / (target * b - a)
        if mstar.denominator == 1:
            raise RationalCollisionError(f"target {target} is a subdivision endpoint")
        j = -(math.floor(mstar) + 1)
    child = farey_child(interval, j)
    assert child.contains(target)
    return j


def encode(target, depth: int) -> list[int]:
    """Symbol sequence ``n_0 .. n_depth`` of a rational surrogate.

    ``n_0`` is the floor of the target, so the target lies in
    ``(n_0, n_0 + 1)``; deeper symbols are child indices.  Irrational
    inputs are not accepted: pass a high-precision rational surrogate,
    and expect :class:`RationalCollisionError` if it hits an endpoint.
    """
    target = Fraction(target)
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    if target.denominator == 1:
        raise RationalCollisionError("integer targets are interval endpoints")
    symbols = [math.floor(target)]
    interval = FareyInterval(Fraction(symbols[0]), Fraction(symbols[0] + 1))
    for _ in range(depth):
        j = _child_index(interval, target)
        symbols.append(j)
        interval = farey_child(interval, j)
    return symbols


def decode(seq) -> FareyInterval:
    """Interval ``I_{n_0 ... n_k}`` of a symbol sequence."""
    seq = list(seq)
    if not seq:
        raise DomainError("decode requires a nonempty sequence")
    interval = FareyInterval(Fraction(int(seq[0])), Fraction(int(seq[0]) + 1))
    for j in seq[1:]:
        interval = farey_child(interval, int(j))
    return interval


@dataclass(frozen=True)
class Address:
    """Finite sequence of integer-pair symbols.

    Used both as a plain two-coordinate Farey code (no restriction) and
    dynamically, where every symbol must name an even-parity cell.
    """

    symbols: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "symbols", tuple((int(s[0]), int(s[1])) for s in self.symbols)
        )

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, k: int) -> tuple[int, int]:
        return self.symbols[k]

    @property
    def depth(self) -> int:
        return len(self.symbols) - 1

    @property
    def is_dynamical(self) -> bool:
        """True when every symbol has even coordinate sum (even cells only)."""
        return all((n1 + n2) % 2 == 0 for n1, n2 in self.symbols)

    def first_coordinates(self) -> list[int]:
        return [s[0] for s in self.symbols]

    def second_coordinates(self) -> list[int]:
        return [s[1] for s in self.symbols]

    def with_symbol(self, k: int, symbol: tuple[int, int]) -> "Address":
        syms = list(self.symbols)
        syms[k] = (int(symbol[0]), int(symbol[1]))
        return Address(tuple(syms))

    @classmethod
    def periodic(cls, pattern, length: int) -> "Address":
        """Address of ``length`` symbols repeating ``pattern``."""
        pattern = [(int(a), int(b)) for a, b in pattern]
        if not pattern:
            raise DomainError("pattern must be nonempty")
        syms = [pattern[k % len(pattern)] for k in range(length)]
        return cls(tuple(syms))


def pair_encode(a1, a2, depth: int) -> Address:
    """Componentwise encoding of a pair of rational surrogates."""
    s1 = encode(a1, depth)
    s2 = encode(a2, depth)
    return Address(tuple(zip(s1, s2)))


def pair_decode(address: Address) -> tuple[FareyInterval, FareyInterval]:
    """Componentwise decoding back to a pair of nested intervals."""
    if len(address) == 0:
        raise DomainError("address must contain at least one symbol")
    return decode(address.first_coordinates()), decode(address.second_coordinates())


def itinerary(x, depth: int, params: Params) -> Address:
    """Cells visited by the forward orbit, as an Address of ``depth+1`` symbols.

    Raises :class:`BoundaryAmbiguityError` when an iterate is within 1e-9
    of a cell wall and :class:`LeftJuliaShadowError` when an iterate sits
    in an odd-parity cell (such points belong to the attracted region).
    """
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    cur = np.asarray(x, dtype=float).reshape(3)
    symbols = []
    for k in range(depth + 1):
        res = fold(cur[0], cur[1])
        w1, w2 = float(res.folded[0]), float(res.folded[1])
        if min(1.0 - abs(w1), 1.0 - abs(w2)) < BOUNDARY_ATOL:
            raise BoundaryAmbiguityError(f"iterate {k} is within 1e-9 of a cell wall")
        r1, r2 = int(res.cell[0]), int(res.cell[1])
        if (r1 + r2) % 2 != 0:
            raise LeftJuliaShadowError(f"iterate {k} entered odd cell ({r1}, {r2})")
        symbols.append((r1, r2))
        if k < depth:
            if cur[2] > MAX_HEIGHT:
                raise RangeOverflowError(f"orbit height exceeds double range at step {k}")
            cur = zorich_eval(cur, params)
    return Address(tuple(symbols))
