"""Nested-box dynamics of the 3-d straight brush.

A box ``S(x, cell)`` is the closed unit-height cube over a cell at bottom
height ``x``.  The map sends such a box onto the closed half-shell of radii
``[lam * e^x, lam * e^(x+1)]`` (upper half for even cells), so the forward
box chain of an address is driven by one scalar ``xi`` per step: the least
bottom height whose box fits inside the current image shell.  A chain dies
when no box fits or when the minimal height drops below the brush floor
``p_lambda``.

Heights along a surviving chain grow doubly exponentially and leave the
double range after a handful of steps.  Once ``lam * e^x`` exceeds twice
(far-corner reach of every remaining cell + p_lambda + 2), every later
step provably succeeds and heights only grow, so the chain is certified
alive without materializing the unrepresentable boxes; pullbacks then seed
from the deepest exact box.  The extra error this introduces is bounded by
``3 * L_hat * exp(-600)`` times a contraction product, far below the
``3 * alpha^depth`` contract of ``phi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BoxChainBrokenError, DomainError, MembershipError, RangeOverflowError
from .geometry import Cell, fold
from .symbolic import Address, BOUNDARY_ATOL
from .zorich import MAX_HEIGHT, Params, inverse_branch, zorich_eval

# Tolerance of the minimal-height bisection and of the floor tie-break.
XI_TOL = 1e-12


class Box(NamedTuple):
    """Closed box ``{x <= x3 <= x+1} x closure(cell)``."""

    x: float
    cell: Cell

    @property
    def center(self) -> np.ndarray:
        return np.array([2.0 * self.cell[0], 2.0 * self.cell[1], self.x + 0.5])


@dataclass(frozen=True)
class BrushPoint:
    """A (t, address) pair intended to satisfy brush membership."""

    t: float
    address: Address


def _base_distances(cell) -> tuple[float, float]:
    """(nearest, farthest) planar distance from the origin to the cell closure."""
    r1, r2 = int(cell[0]), int(cell[1])
    near = []
    far = []
    for r in (r1, r2):
        lo, hi = 2.0 * r - 1.0, 2.0 * r + 1.0
        near.append(0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi)))
        far.append(max(abs(lo), abs(hi)))
    return math.hypot(*near), math.hypot(*far)


def box_norm_range(box: Box) -> tuple[float, float]:
    """Exact (min, max) of the Euclidean norm over the closed box."""
    near2d, far2d = _base_distances(box.cell)
    lo3, hi3 = box.x, box.x + 1.0
    near3 = 0.0 if lo3 <= 0.0 <= hi3 else min(abs(lo3), abs(hi3))
    far3 = max(abs(lo3), abs(hi3))
    return math.hypot(near2d, near3), math.hypot(far2d, far3)


def _least_xi(r_in: float, near2d: float) -> float:
    """Least xi >= 0 whose box clears the inner radius, by bisection.

    For xi >= 0 the minimal box norm is ``hypot(xi, near2d)`` (the exact
    norm-range formula), monotone increasing in xi; iteration stops at
    XI_TOL or at float resolution, returning the certified-clear endpoint.
    """
    if near2d >= r_in:
        return 0.0
    lo, hi = 0.0, r_in
    while hi - lo > XI_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if math.hypot(mid, near2d) >= r_in:
            hi = mid
        else:
            lo = mid
    return hi


class BoxStep(NamedTuple):
    box: Box | None
    xi: float
    borderline: bool  # xi within XI_TOL of the brush floor


def box_step(current: Box, n_next, params: Params) -> BoxStep:
    """One forward step of the box dynamics.

    Computes the least bottom height ``xi`` whose box over ``n_next`` clears
    the inner radius of the image shell of ``current``; the step succeeds
    iff that box also fits under the outer radius and ``xi`` reaches the
    brush floor.  Floor comparisons within XI_TOL are resolved as nonempty
    and flagged borderline.
    """
    cell = Cell(*n_next)
    if not cell.is_even or not Cell(*current.cell).is_even:
        raise DomainError("box dynamics requires even-parity cells")
    log_r_in = math.log(params.lam) + current.x
    if log_r_in > MAX_HEIGHT:
        raise RangeOverflowError("image shell exceeds double range")
    r_in = math.exp(log_r_in)
    r_out = r_in * math.e
    near2d, far2d = _base_distances(cell)
    xi = _least_xi(r_in, near2d)
    borderline = abs(xi - params.p_lambda) <= XI_TOL
    ok = math.hypot(xi + 1.0, far2d) <= r_out and xi >= params.p_lambda - XI_TOL
    return BoxStep(Box(xi, cell) if ok else None, xi, borderline)


def next_box(current: Box, n_next, params: Params) -> Box | None:
    """Successor box of the chain, or None when the chain dies here."""
    return box_step(current, n_next, params).box


class ChainStatus(enum.Enum):
    COMPLETE = "complete"  # all boxes materialized to the requested depth
    SATURATED = "saturated"  # certified alive beyond the last exact box
    DEAD = "dead"


@dataclass(frozen=True)
class BoxChain:
    boxes: tuple[Box, ...]
    status: ChainStatus
    died_at: int | None
    borderline_steps: tuple[int, ...]

    @property
    def alive(self) -> bool:
        return self.status is not ChainStatus.DEAD


def _check_dynamical(address: Address, depth: int) -> None:
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    if len(address) < depth + 1:
        raise DomainError(f"address needs at least {depth + 1} symbols for depth {depth}")
    if not address.is_dynamical:
        raise DomainError("address contains odd-parity symbols")


def box_chain(t: float, address: Address, depth: int, params: Params) -> BoxChain:
    """Forward box chain ``R_0 .. R_depth`` of ``(t, address)``."""
    _check_dynamical(address, depth)
    if not t >= 0.0:
        raise DomainError("the chain parameter t must be nonnegative")
    boxes = [Box(float(t), Cell(*address[0]))]
    borderline: list[int] = []
    log_lam = math.log(params.lam)
    for k in range(1, depth + 1):
        cur = boxes[-1]
        if log_lam + cur.x > MAX_HEIGHT:
            remaining = [_base_distances(address[j])[1] for j in range(k, depth + 1)]
            guard = 2.0 * (max(remaining) + params.p_lambda + 2.0)
            # lam * e^x >= lam * e^MAX_HEIGHT here; compare against that floor
            if params.lam * math.exp(MAX_HEIGHT) >= guard:
                return BoxChain(tuple(boxes), ChainStatus.SATURATED, None, tuple(borderline))
            raise RangeOverflowError("cells too distant to certify a saturated chain")
        step = box_step(cur, address[k], params)
        if step.borderline:
            borderline.append(k)
        if step.box is None:
            return BoxChain(tuple(boxes), ChainStatus.DEAD, k, tuple(borderline))
        boxes.append(step.box)
    return BoxChain(tuple(boxes), ChainStatus.COMPLETE, None, tuple(borderline))


def brush_membership(t: float, address: Address, depth: int, params: Params) -> bool:
    """Whether the chain of ``(t, address)`` survives to ``depth``.

    Parameters below the brush floor are non-members by construction (the
    chain is only defined for starting heights >= p_lambda).
    """
    _check_dynamical(address, depth)
    if not t >= 0.0:
        raise DomainError("membership requires t >= 0")
    if t < params.p_lambda:
        return False
    return box_chain(t, address, depth, params).alive


def t_min(address: Address, depth: int, tol: float, params: Params) -> float:
    """Least member height of an address at fixed depth, by bisection.

    Returns math.inf when no membership is found below ``p_lambda + 100``
    (one step from there already exceeds any representable return).
    """
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    lo = params.p_lambda
    hi = params.p_lambda + 100.0
    if brush_membership(lo, address, depth, params):
        return lo
    if not brush_membership(hi, address, depth, params):
        return math.inf
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if brush_membership(mid, address, depth, params):
            hi = mid
        else:
            lo = mid
    return hi


def phi(t: float, address: Address, depth: int, params: Params) -> np.ndarray:
    """Pull the center of the deepest box back along the inverse branches.

    The result is within ``3 * alpha^depth`` of the ideal infinite-depth
    point; a saturated chain seeds from its deepest exact box, whose first
    pullback contracts far more strongly than alpha, so the bound is
    preserved.
    """
    chain = box_chain(t, address, depth, params)
    if not chain.alive:
        raise MembershipError(
            f"(t={t}, address) is not a member at depth {depth}; chain died at {chain.died_at}"
        )
    boxes = chain.boxes
    point = boxes[-1].center
    for k in range(len(boxes) - 2, -1, -1):
        point = inverse_branch(point, boxes[k].cell, params)
    return point


class PsiResult(NamedTuple):
    z_inf: float
    address: Address
    z_values: tuple[float, ...]


def psi(w, depth: int, params: Params) -> PsiResult:
    """Brush coordinates of a point: limiting bottom height plus itinerary.

    For each computable forward step ``k`` a box is pinned at the iterate
    (minimal bottom height >= p_lambda containing it) and pulled back by
    maximal-height boxes whose image shells contain their successor; the
    bottom height ``z_k`` of the pulled-back box is nondecreasing in ``k``
    and sandwiched in ``[w3 - 1, w3]``.  Forward iteration stops where the
    orbit leaves the double range, so the result carries ``z_k`` for the
    largest computed ``k`` along with the itinerary prefix.
    """
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    w = np.asarray(w, dtype=float).reshape(3)

    points = [w]
    cells: list[tuple[int, int]] = []
    for k in range(depth + 1):
        cur = points[-1]
        res = fold(cur[0], cur[1])
        w1, w2 = float(res.folded[0]), float(res.folded[1])
        if min(1.0 - abs(w1), 1.0 - abs(w2)) < BOUNDARY_ATOL:
            from .errors import BoundaryAmbiguityError

            raise BoundaryAmbiguityError(f"iterate {k} is within 1e-9 of a cell wall")
        r1, r2 = int(res.cell[0]), int(res.cell[1])
        if (r1 + r2) % 2 != 0:
            from .errors import LeftJuliaShadowError

            raise LeftJuliaShadowError(f"iterate {k} entered odd cell ({r1}, {r2})")
        cells.append((r1, r2))
        if k < depth:
            if cur[2] > MAX_HEIGHT:
                break
            points.append(zorich_eval(cur, params))

    k_max = len(cells) - 1
    z_values = [_psi_backward(points, cells, kk, params) for kk in range(k_max + 1)]
    return PsiResult(z_values[-1], Address(tuple(cells)), tuple(z_values))


def _psi_backward(points, cells, k: int, params: Params) -> float:
    """Bottom height at the base of the depth-k backward box recursion."""
    top = float(points[k][2])
    u = max(params.p_lambda, top - 1.0)
    if u > top + 1e-9:
        raise BoxChainBrokenError(
            f"iterate {k} lies below the brush floor (x3={top:.6g} < p_lambda)"
        )
    height = u
    for j in range(k, 0, -1):
        mn, mx = box_norm_range(Box(height, Cell(*cells[j])))
        if mx > math.e * mn * (1.0 + 1e-12):
            raise BoxChainBrokenError(
                f"box at step {j} does not fit inside one image shell"
            )
        height = math.log(mn / params.lam)
    return height
