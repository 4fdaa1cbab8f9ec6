"""The Zorich exponential family on R^3 and its certified parameter regime.

The map scales the square-to-hemisphere map by ``lam * exp(x3)`` and is
extended to all of R^3 by the reflection group of :func:`~.geometry.fold`.
The certified regime bundles, for a bi-Lipschitz over-estimate ``L_hat``:

* ``lambda_max(L_hat) = exp(-L_hat) / L_hat`` -- the family threshold below
  which the escaping set is a union of hairs,
* ``alpha`` -- the smallest grid-certified inverse-branch contraction
  factor, satisfying ``lam <= exp(-L_hat/alpha) * L_hat / alpha``,
* ``M = log(L_hat / (lam * alpha))`` -- the expansion half-space height:
  the map sends ``{x3 <= M}`` strictly below ``M`` and inverse branches
  contract by ``alpha`` above ``M``,
* ``p_lambda`` -- the brush floor; defaults to ``M`` and can optionally be
  raised by a grid scan for the lowest height carrying bounded orbits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NonsmoothPointError, RangeOverflowError
from .geometry import Cell, fold, h_eval, h_inverse, unfold

# exp() overflows just above 709; heights beyond this are not representable.
MAX_HEIGHT = 700.0


def lambda_max(L_hat: float) -> float:
    """Upper end of the certified parameter range, ``exp(-L_hat)/L_hat``."""
    if not L_hat >= 1.0:
        raise DomainError("lambda_max requires L_hat >= 1")
    return math.exp(-L_hat) / L_hat


def _alpha_admissible(alpha: float, lam: float, L_hat: float) -> bool:
    return lam <= math.exp(-L_hat / alpha) * L_hat / alpha


def compute_alpha(lam: float, L_hat: float) -> float:
    """Smallest certified contraction factor for the inverse branches.

    Scans the grid {0.001, ..., 0.999} for the least admissible alpha and
    refines the bracket by bisection to 1e-6.  The returned value always
    satisfies the admissibility predicate; smaller alpha means stronger
    certified contraction.
    """
    if not (0.0 < lam < lambda_max(L_hat)):
        raise DomainError("lambda outside (0, lambda_max(L_hat))")
    grid = np.arange(1, 1000) / 1000.0
    ok = [_alpha_admissible(a, lam, L_hat) for a in grid]
    if not any(ok):
        raise AssertionError("no admissible alpha on the grid; regime check failed")
    idx = ok.index(True)
    hi = grid[idx]
    lo = grid[idx - 1] if idx > 0 else 1e-12
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if _alpha_admissible(mid, lam, L_hat):
            hi = mid
        else:
            lo = mid
    return float(hi)


def compute_M(lam: float, L_hat: float, alpha: float) -> float:
    """Expansion half-space height ``log(L_hat / (lam * alpha))``."""
    return math.log(L_hat / (lam * alpha))


class PLambdaResult(NamedTuple):
    value: float
    j_est: float | None
    budget_exhausted: bool


def compute_p_lambda(
    lam: float,
    L_hat: float,
    alpha: float,
    scan_budget: int = 0,
    scan_depth: int = 20,
    grid_step: float = 0.25,
    height_span: float = 3.0,
) -> PLambdaResult:
    """Brush floor height.

    Defaults to ``M``.  With ``scan_budget > 0``, heights above ``M`` are
    scanned on a grid for the least height carrying a point whose orbit
    keeps an even-cell itinerary of depth >= ``scan_depth`` while staying
    height-bounded (a heuristic stand-in for meeting the escaping hairs);
    the floor is then ``max(J_est - 1, M)``.  When the budget runs out
    before a hit the floor falls back to ``M`` with the exhausted flag set.
    """
    M = compute_M(lam, L_hat, alpha)
    if scan_budget <= 0:
        return PLambdaResult(M, None, False)

    params = Params(L_hat=L_hat, lam=lam, alpha=alpha, M=M, p_lambda=M)
    budget = scan_budget
    side = np.linspace(-0.9, 0.9, 13)
    c = M
    while c <= M + height_span:
        for a in side:
            for b in side:
                if budget <= 0:
                    return PLambdaResult(M, None, True)
                budget -= 1
                if _has_bounded_itinerary(np.array([a, b, c]), params, scan_depth, c + 2.0):
                    return PLambdaResult(max(c - 1.0, M), c, False)
        c += grid_step
    return PLambdaResult(M, None, False)


def _has_bounded_itinerary(x: np.ndarray, params: "Params", depth: int, cap: float) -> bool:
    cur = x
    for _ in range(depth):
        res = fold(cur[0], cur[1])
        if (int(res.cell[0]) + int(res.cell[1])) % 2 != 0:
            return False
        if cur[2] > cap or cur[2] > MAX_HEIGHT:
            return False
        cur = zorich_eval(cur, params)
    return True


@dataclass(frozen=True)
class Params:
    """Certified parameter bundle ``(L_hat, lam, alpha, M, p_lambda)``.

    Immutable and validated on construction; safe to share across threads.
    """

    L_hat: float
    lam: float
    alpha: float
    M: float
    p_lambda: float

    def __post_init__(self):
        if not self.L_hat > 1.0:
            raise DomainError("L_hat must exceed 1")
        if not (0.0 < self.lam < lambda_max(self.L_hat)):
            raise DomainError("lambda outside the certified range (0, exp(-L)/L)")
        if not (0.0 < self.alpha < 1.0):
            raise DomainError("alpha must lie in (0, 1)")
        if not _alpha_admissible(self.alpha * (1.0 + 1e-12), self.lam, self.L_hat):
            raise DomainError("alpha does not certify the contraction inequality")
        M_expected = compute_M(self.lam, self.L_hat, self.alpha)
        if abs(self.M - M_expected) > 1e-9 * max(1.0, abs(M_expected)):
            raise DomainError("M is inconsistent with log(L_hat/(lam*alpha))")
        if self.p_lambda < self.M - 1e-12 or not self.p_lambda > 1.0:
            raise DomainError("p_lambda must satisfy p_lambda >= M and p_lambda > 1")

    @classmethod
    def certify(cls, lam: float, L_hat: float, scan_budget: int = 0) -> "Params":
        """Build the full bundle from ``(lam, L_hat)``."""
        alpha = compute_alpha(lam, L_hat)
        M = compute_M(lam, L_hat, alpha)
        p = compute_p_lambda(lam, L_hat, alpha, scan_budget=scan_budget)
        return cls(L_hat=L_hat, lam=lam, alpha=alpha, M=M, p_lambda=p.value)

    def as_dict(self) -> dict:
        return {
            "L_hat": self.L_hat,
            "lambda": self.lam,
            "alpha": self.alpha,
            "M": self.M,
            "p_lambda": self.p_lambda,
        }


def zorich_eval(x, params: Params) -> np.ndarray:
    """Evaluate the map at points ``x`` of shape (..., 3).

    The image is ``lam * exp(x3)`` times the hemisphere point of the folded
    coordinates, with the third component negated on odd-parity cells, so
    the image norm is exactly ``lam * exp(x3)``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise DomainError("points must have three coordinates")
    if not np.all(np.isfinite(x)):
        raise DomainError("point has non-finite coordinates")
    x3 = x[..., 2]
    if np.any(x3 > MAX_HEIGHT):
        raise RangeOverflowError("x3 too large: image norm exceeds double range")
    res = fold(x[..., 0], x[..., 1])
    u = h_eval(res.folded)
    scale = params.lam * np.exp(x3)
    out = np.empty_like(u)
    out[..., 0] = scale * u[..., 0]
    out[..., 1] = scale * u[..., 1]
    out[..., 2] = scale * res.parity * u[..., 2]
    return out


def _smooth_distance(x1: float, x2: float) -> float:
    """Distance of the folded point from fold lines and disk-map diagonals."""
    res = fold(float(x1), float(x2))
    w1, w2 = float(res.folded[0]), float(res.folded[1])
    wall = min(1.0 - abs(w1), 1.0 - abs(w2))
    diag = min(abs(w1 - w2), abs(w1 + w2)) / math.sqrt(2.0)
    return min(wall, diag)


def zorich_jacobian(x, params: Params) -> np.ndarray:
    """Central finite-difference Jacobian at a single smooth-locus point.

    Step is 1e-6 * max(1, |x|).  Raises on the nonsmooth locus (cell walls
    and the diagonals of the square, where the disk map has kinks).
    """
    x = np.asarray(x, dtype=float).reshape(3)
    if _smooth_distance(x[0], x[1]) < 1e-6:
        raise NonsmoothPointError("point is within 1e-6 of the nonsmooth locus")
    if x[2] > MAX_HEIGHT - 1.0:
        raise RangeOverflowError("x3 too large for finite differencing")
    step = 1e-6 * max(1.0, float(np.linalg.norm(x)))
    cols = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        cols.append((zorich_eval(x + e, params) - zorich_eval(x - e, params)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def _safe_norm(y: np.ndarray) -> np.ndarray:
    """Euclidean norm along the last axis without intermediate overflow."""
    m = np.max(np.abs(y), axis=-1)
    scaled = np.divide(y, m[..., None], out=np.zeros_like(y), where=m[..., None] > 0.0)
    return m * np.sqrt(np.sum(scaled * scaled, axis=-1))


def inverse_branch(y, cell: Cell, params: Params) -> np.ndarray:
    """Branch of the inverse map landing in the beam over ``cell``.

    ``y`` may be a single point or an array of shape (..., 3); the sign of
    ``y.x3`` must match the cell parity (upper half-space for even cells),
    zero being allowed.  The height of the result is ``log(|y| / lam)``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != 3:
        raise DomainError("points must have three coordinates")
    cell = Cell(*cell)
    norm = _safe_norm(y)
    if np.any(norm == 0.0):
        raise DomainError("the origin has no inverse branch preimage")
    sigma = cell.parity
    if np.any(sigma * y[..., 2] < -1e-12 * norm):
        raise DomainError("sign of y.x3 does not match the cell parity")
    u = y / norm[..., None]
    u_up = np.stack([u[..., 0], u[..., 1], np.abs(u[..., 2])], axis=-1)
    w = h_inverse(u_up)
    out = np.empty(y.shape, dtype=float)
    out[..., 0] = unfold(w[..., 0], cell.r1)
    out[..., 1] = unfold(w[..., 1], cell.r2)
    out[..., 2] = np.log(norm / params.lam)
    return out


class OrbitResult(NamedTuple):
    points: np.ndarray  # (k, 3), k <= n + 1
    truncated: bool


def orbit(x, n: int, params: Params) -> OrbitResult:
    """Forward orbit ``[x, Z(x), ..., Z^n(x)]``.

    Stops early with ``truncated=True`` when the next height would overflow
    the double range.
    """
    if n < 0:
        raise DomainError("orbit length must be nonnegative")
    cur = np.asarray(x, dtype=float).reshape(3)
    pts = [cur]
    truncated = False
    for _ in range(n):
        if cur[2] > MAX_HEIGHT:
            truncated = True
            break
        cur = zorich_eval(cur, params)
        pts.append(cur)
    return OrbitResult(np.array(pts), truncated)


class Classification(enum.Enum):
    ESCAPING = "escaping"
    CONVERGING = "converging"
    UNDECIDED = "undecided"


def classify_point(
    x,
    params: Params,
    max_iter: int = 200,
    escape_height: float | None = None,
) -> Classification:
    """Crude orbit classifier.

    Escaping once some iterate reaches ``escape_height`` (default
    ``p_lambda + 50``, from which one further step exceeds any
    representable return); converging when consecutive iterates differ by
    less than 1e-9; otherwise undecided.
    """
    if escape_height is None:
        escape_height = params.p_lambda + 50.0
    cur = np.asarray(x, dtype=float).reshape(3)
    for _ in range(max_iter):
        if cur[2] >= escape_height:
            return Classification.ESCAPING
        nxt = zorich_eval(cur, params)
        if np.linalg.norm(nxt - cur) < 1e-9:
            return Classification.CONVERGING
        cur = nxt
    if cur[2] >= escape_height:
        return Classification.ESCAPING
    return Classification.UNDECIDED
