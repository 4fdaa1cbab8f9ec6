"""Square-to-hemisphere geometry underlying the Zorich exponential family.

The pieces are

* ``square_to_disk`` / ``disk_to_square`` -- the max-norm radial bijection
  between the square ``Q = [-1, 1]^2`` and the closed unit disk,
* ``h_eval`` / ``h_inverse`` -- the bi-Lipschitz map from ``Q`` onto the
  upper unit hemisphere (geodesic polar cap composed with the disk map)
  and its analytic inverse,
* ``fold`` -- reflection of the plane into ``Q`` across the grid of
  odd-integer lines, with cell and parity bookkeeping,
* ``estimate_L`` -- a seeded numerical over-estimate of the bi-Lipschitz
  constant of ``h_eval``,
* ``spherical_ray_length`` -- closed form for the length of an axis ray in
  the conformal metric with density ``1 / (1 + |p|^2)`` (the metric of the
  sphere of radius 1/2 touching the origin).

Points are arrays with coordinates along the last axis; every function
broadcasts over leading axes.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError

# Slack for "lies in Q" checks; folded coordinates can overshoot by an ulp.
_SQUARE_ATOL = 1e-12


class Cell(NamedTuple):
    """Index of the square cell ``(2*r1 - 1, 2*r1 + 1) x (2*r2 - 1, 2*r2 + 1)``."""

    r1: int
    r2: int

    @property
    def is_even(self) -> bool:
        return (self.r1 + self.r2) % 2 == 0

    @property
    def parity(self) -> int:
        """+1 on even cells, -1 on odd cells."""
        return 1 if self.is_even else -1


class FoldResult(NamedTuple):
    """Result of folding plane points into the fundamental square.

    ``folded`` has shape (..., 2), ``cell`` is the integer pair array of
    shape (..., 2) and ``parity`` is +1/-1 with shape (...,).
    """

    folded: np.ndarray
    cell: np.ndarray
    parity: np.ndarray


def _check_in_square(p: np.ndarray) -> np.ndarray:
    """Validate sup-norm <= 1 (with ulp slack) and clip exactly onto Q."""
    if not np.all(np.isfinite(p)):
        raise DomainError("point has non-finite coordinates")
    sup = np.max(np.abs(p), axis=-1)
    if np.any(sup > 1.0 + _SQUARE_ATOL):
        raise DomainError("point lies outside the square Q = [-1, 1]^2")
    return np.clip(p, -1.0, 1.0)


def square_to_disk(p) -> np.ndarray:
    """Max-norm radial map from Q onto the closed unit disk.

    Scales each point by ``|p|_inf / |p|_2`` so rays through the origin are
    preserved and the square boundary lands on the unit circle.  The origin
    is fixed.
    """
    p = _check_in_square(np.asarray(p, dtype=float))
    sup = np.max(np.abs(p), axis=-1)
    eucl = np.hypot(p[..., 0], p[..., 1])
    scale = np.divide(sup, eucl, out=np.zeros_like(sup), where=eucl > 0.0)
    return p * scale[..., None]


def disk_to_square(d) -> np.ndarray:
    """Inverse of :func:`square_to_disk` on the closed unit disk."""
    d = np.asarray(d, dtype=float)
    eucl = np.hypot(d[..., 0], d[..., 1])
    if np.any(eucl > 1.0 + _SQUARE_ATOL):
        raise DomainError("point lies outside the closed unit disk")
    sup = np.max(np.abs(d), axis=-1)
    scale = np.divide(eucl, sup, out=np.zeros_like(sup), where=sup > 0.0)
    return np.clip(d * scale[..., None], -1.0, 1.0)


def h_eval(p) -> np.ndarray:
    """Evaluate the square-to-hemisphere map.

    With ``d = square_to_disk(p)``, ``rho = |d|_2`` and ``theta`` the angle
    of ``d``, the image is the unit vector with polar angle ``pi * rho / 2``
    and azimuth ``theta``.  The center of Q goes to the pole (0, 0, 1) and
    the boundary of Q lands on the equator ``x3 = 0``.
    """
    d = square_to_disk(p)
    rho = np.minimum(np.hypot(d[..., 0], d[..., 1]), 1.0)
    s = np.sin(0.5 * np.pi * rho)
    radial = np.divide(s, rho, out=np.zeros_like(s), where=rho > 0.0)
    out = np.empty(d.shape[:-1] + (3,), dtype=float)
    out[..., 0] = d[..., 0] * radial
    out[..., 1] = d[..., 1] * radial
    out[..., 2] = np.cos(0.5 * np.pi * rho)
    return out


def h_inverse(u) -> np.ndarray:
    """Invert :func:`h_eval` on the closed upper hemisphere.

    Requires ``| |u| - 1 | <= 1e-9`` and ``u.x3 >= -1e-12``.  Computed
    analytically: the polar angle gives the disk radius, the azimuth gives
    the direction, and the disk point is pushed back to the square.
    """
    u = np.asarray(u, dtype=float)
    norm = np.sqrt(np.sum(u * u, axis=-1))
    if np.any(np.abs(norm - 1.0) > 1e-9):
        raise DomainError("input is not a unit vector")
    if np.any(u[..., 2] < -1e-12 * np.maximum(norm, 1.0)):
        raise DomainError("input lies in the open lower hemisphere")
    w = u / norm[..., None]
    rho = (2.0 / np.pi) * np.arccos(np.clip(w[..., 2], -1.0, 1.0))
    horiz = np.hypot(w[..., 0], w[..., 1])
    radial = np.divide(rho, horiz, out=np.zeros_like(rho), where=horiz > 0.0)
    d = w[..., :2] * radial[..., None]
    # rho can exceed 1 by an ulp when u sits on the equator
    eucl = np.hypot(d[..., 0], d[..., 1])
    over = eucl > 1.0
    if np.any(over):
        d = np.where(over[..., None], d / np.maximum(eucl, 1.0)[..., None], d)
    return disk_to_square(d)


def fold(x1, x2) -> FoldResult:
    """Fold plane coordinates into Q across the odd-integer reflection grid.

    Each coordinate is reflected into [-1, 1]; the cell index records which
    copy of the fundamental square the point came from and ``parity`` is
    ``(-1) ** (r1 + r2)``.  Points exactly on a fold line are assigned to
    the cell with the smaller index (deterministic tie-break).
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
        raise DomainError("fold requires finite coordinates")
    x1, x2 = np.broadcast_arrays(x1, x2)
    r1 = np.ceil(0.5 * (x1 - 1.0)).astype(np.int64)
    r2 = np.ceil(0.5 * (x2 - 1.0)).astype(np.int64)
    w1 = np.where(r1 % 2 == 0, x1 - 2.0 * r1, 2.0 * r1 - x1)
    w2 = np.where(r2 % 2 == 0, x2 - 2.0 * r2, 2.0 * r2 - x2)
    folded = np.stack([w1, w2], axis=-1)
    cell = np.stack([r1, r2], axis=-1)
    parity = np.where((r1 + r2) % 2 == 0, 1, -1)
    return FoldResult(folded, cell, parity)


def fold_cell(x1: float, x2: float) -> Cell:
    """Cell of a single point, as a :class:`Cell`."""
    res = fold(float(x1), float(x2))
    return Cell(int(res.cell[..., 0]), int(res.cell[..., 1]))


def unfold(w, cell) -> np.ndarray:
    """Map folded coordinates back into a chosen cell by reflection."""
    w = np.asarray(w, dtype=float)
    r = np.asarray(cell, dtype=np.int64)
    return np.where(r % 2 == 0, 2.0 * r + w, 2.0 * r - w)


def _h_jacobian_samples(h_fn, points: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Jacobians of ``h_fn`` at an (n, 2) point array."""
    e1 = np.array([step, 0.0])
    e2 = np.array([0.0, step])
    col1 = (h_fn(points + e1) - h_fn(points - e1)) / (2.0 * step)
    col2 = (h_fn(points + e2) - h_fn(points - e2)) / (2.0 * step)
    return np.stack([col1, col2], axis=-1)  # (n, 3, 2)


def estimate_L(n_samples: int, seed: int, h_fn: Callable | None = None) -> float:
    """Seeded over-estimate of the bi-Lipschitz constant of the square map.

    Samples ``n_samples`` random point pairs in Q and measures both secant
    ratios ``|h(p) - h(q)| / |p - q|`` and their reciprocals, plus singular
    values of finite-difference Jacobians away from the nonsmooth diagonals.
    Returns 1.05 times the largest candidate, so the result over-covers the
    true constant with a safety margin.  Deterministic given the seed.
    """
    if n_samples < 10_000:
        raise DomainError("estimate_L requires at least 10^4 samples")
    if h_fn is None:
        h_fn = h_eval
    rng = np.random.default_rng(seed)

    p = rng.uniform(-1.0, 1.0, size=(n_samples, 2))
    q = rng.uniform(-1.0, 1.0, size=(n_samples, 2))
    dpq = np.linalg.norm(p - q, axis=-1)
    keep = dpq > 1e-9
    img = np.linalg.norm(np.asarray(h_fn(p))[keep] - np.asarray(h_fn(q))[keep], axis=-1)
    ratios = img / dpq[keep]
    ratios = ratios[ratios > 0.0]
    candidates = [float(np.max(ratios)), float(np.max(1.0 / ratios))]

    # Jacobian sampling on the smooth locus: keep clear of the square
    # diagonals (max-norm kinks), the center and the boundary.
    n_jac = max(n_samples // 10, 1000)
    margin = 1e-3
    pts = rng.uniform(-1.0 + margin, 1.0 - margin, size=(2 * n_jac, 2))
    diag = np.minimum(np.abs(pts[:, 0] - pts[:, 1]), np.abs(pts[:, 0] + pts[:, 1]))
    pts = pts[diag / np.sqrt(2.0) > margin][:n_jac]
    jac = _h_jacobian_samples(h_fn, pts, step=1e-6)
    sv = np.linalg.svd(jac, compute_uv=False)
    candidates.append(float(np.max(sv)))
    candidates.append(float(1.0 / np.min(sv)))

    return 1.05 * max(candidates)


def spherical_ray_length(x, y, z):
    """Length of the ray ``[x, inf) x {(y, z)}`` in the 1/(1+|p|^2) metric.

    Closed form of ``int_x^inf dt / (1 + t^2 + y^2 + z^2)``; the value lies
    in (0, pi] and is strictly decreasing in ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(z))):
        raise DomainError("spherical_ray_length requires finite coordinates")
    s = np.sqrt(1.0 + y * y + z * z)
    val = (0.5 * np.pi - np.arctan(x / s)) / s
    if val.ndim == 0:
        return float(val)
    return val
