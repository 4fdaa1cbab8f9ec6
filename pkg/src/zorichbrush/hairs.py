"""Hair tracing, spherical lengths, the cube embedding and a density probe.

A hair is the curve swept by the brush pullback as the base parameter runs
upward from its minimal member height.  Lengths are measured in the
conformal metric with density ``1/(1 + |p|^2)`` (the round metric of the
radius-1/2 sphere touching the origin), under which every hair has finite
length even though it escapes to infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brush import box_chain, phi, t_min
from .errors import DomainError, NoHairError
from .geometry import spherical_ray_length
from .symbolic import Address
from .zorich import Params

DEFAULT_GRID_COUNT = 64
DEFAULT_GRID_SPAN = 5.0


@dataclass(frozen=True)
class Hair:
    """A traced hair: samples ordered by the base parameter t.

    ``length_spherical`` is the conformal polyline length of the samples;
    ``tail_estimate`` bounds the un-traced tail above the last sample and
    is reported separately because it is an estimate, not a measurement.
    """

    address: Address
    t_min: float
    samples: tuple[tuple[float, np.ndarray], ...]
    length_spherical: float
    tail_estimate: float

    def points(self) -> np.ndarray:
        return np.array([p for _, p in self.samples])

    def parameters(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])


def default_t_grid(t_start: float, span: float = DEFAULT_GRID_SPAN, count: int = DEFAULT_GRID_COUNT) -> np.ndarray:
    """Geometric sample grid over [t_start, t_start + span], densest at the base."""
    if count < 2 or span <= 0.0:
        raise DomainError("grid needs count >= 2 and positive span")
    offsets = np.geomspace(1e-6, span, count - 1)
    return t_start + np.concatenate([[0.0], offsets])


def _polyline_length(points: np.ndarray) -> float:
    """Conformal polyline length by the midpoint rule per segment."""
    if len(points) < 2:
        raise DomainError("need at least two samples to measure a length")
    segs = np.diff(points, axis=0)
    mids = 0.5 * (points[1:] + points[:-1])
    dens = 1.0 / (1.0 + np.sum(mids * mids, axis=-1))
    return float(np.sum(np.linalg.norm(segs, axis=-1) * dens))


def hair_length(hair) -> float:
    """Spherical polyline length of a hair (or of a bare sample list)."""
    if isinstance(hair, Hair):
        return _polyline_length(hair.points())
    pts = np.array([p for _, p in hair]) if isinstance(hair[0], tuple) else np.asarray(hair)
    return _polyline_length(pts)


def trace_hair(address: Address, t_grid, depth: int, params: Params, tol: float = 1e-9) -> Hair:
    """Sample the hair of an address along a parameter grid.

    The grid must be sorted and start no lower than the hair's minimal
    member height; a sample at the minimum itself is always included.
    """
    tm = t_min(address, depth, tol, params)
    if math.isinf(tm):
        raise NoHairError("address has no finite hair base in the search window")
    grid = np.sort(np.asarray(t_grid, dtype=float))
    if grid[0] < tm - tol:
        raise DomainError(f"grid starts below the hair base t_min={tm:.12g}")
    ts = [tm] + [float(t) for t in grid if t > tm]
    samples = tuple((t, phi(t, address, depth, params)) for t in ts)
    pts = np.array([p for _, p in samples])
    length = _polyline_length(pts)
    top = pts[-1]
    tail = spherical_ray_length(top[2], top[0], top[1])
    if not 0.0 < length <= np.pi + 1e-9:
        raise AssertionError("hair length fell outside (0, pi]")
    return Hair(address, tm, samples, length, float(tail))


def endpoint(address: Address, depth: int, tol: float, params: Params) -> np.ndarray:
    """The hair point at the minimal member height."""
    tm = t_min(address, depth, tol, params)
    if math.isinf(tm):
        raise NoHairError("address has no finite hair base in the search window")
    return phi(tm, address, depth, params)


def embed_H(x, y, z) -> np.ndarray:
    """Embed a point of the brush half-space into the unit cube.

    The first two coordinates compactify the transverse directions by
    arctan; the third is the normalized spherical tail length of the ray
    from ``x`` to infinity, strictly decreasing in ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(x < 0.0):
        raise DomainError("embed_H requires x >= 0")
    e1 = np.arctan(y) / np.pi + 0.5
    e2 = np.arctan(z) / np.pi + 0.5
    e3 = np.asarray(spherical_ray_length(x, y, z)) / np.pi
    return np.stack(np.broadcast_arrays(e1, e2, e3), axis=-1)


@dataclass(frozen=True)
class DensityWitness:
    """One approach hair found by the density probe."""

    index: int
    shift: int
    address: Address
    t_min: float
    endpoint: np.ndarray
    length: float
    length_error: float
    distance: float


def _truncation_parameter(hair: Hair, c: float) -> float:
    """Parameter at which the tail length above it equals ``c``."""
    pts = hair.points()
    ts = hair.parameters()
    segs = np.linalg.norm(np.diff(pts, axis=0), axis=-1)
    mids = 0.5 * (pts[1:] + pts[:-1])
    seg_len = segs / (1.0 + np.sum(mids * mids, axis=-1))
    # cumulative tail length measured downward from the top sample
    tail = np.concatenate([np.cumsum(seg_len[::-1])[::-1], [0.0]])
    if not 0.0 < c < tail[0]:
        raise DomainError("c must lie strictly inside the measured hair length")
    k = int(np.searchsorted(-tail, -c, side="right")) - 1
    k = min(max(k, 0), len(seg_len) - 1)
    # interpolate within the segment [k, k+1]
    extra = tail[k] - c
    frac = extra / seg_len[k] if seg_len[k] > 0.0 else 0.0
    return float(ts[k] + frac * (ts[k + 1] - ts[k]))


def density_probe(
    address: Address,
    c: float,
    depth: int,
    params: Params,
    max_index: int = 5,
    span: float = 35.0,
    grid_count: int = 96,
    length_tol: float | None = None,
    t_tol: float = 1e-12,
) -> list[DensityWitness]:
    """Search for hairs of tail length ~c whose endpoints approach the
    truncation point of the base hair.

    For each symbol index ``i`` the second coordinate is decremented (in
    parity-preserving steps of two) and the step size is tuned so that the
    modified address becomes a member exactly near the truncation
    parameter; the resulting hairs agree with the base hair for ``i``
    steps, so their endpoints converge to the truncation point while their
    lengths approach ``c``.  Indices whose chains are already out of float
    range at the truncation parameter cannot be tuned and are skipped; an
    empty list is a valid outcome.
    """
    tm = t_min(address, depth, t_tol, params)
    if math.isinf(tm):
        raise NoHairError("base address has no finite hair")
    base = trace_hair(address, default_t_grid(tm, span, grid_count), depth, params, tol=t_tol)
    if not c < base.length_spherical:
        raise DomainError("c must be below the base hair's measured length")
    t_c = _truncation_parameter(base, c)
    p_star = phi(t_c, address, depth, params)
    # a step is tunable only while the chain at t_c is still exactly
    # representable there; beyond that no integer cell shift can move t_min
    exact_boxes = len(box_chain(t_c, address, depth, params).boxes)

    witnesses = []
    for i in range(1, min(max_index, depth - 1) + 1):
        if i >= exact_boxes:
            continue
        found = _tune_neighbor(address, i, t_c, depth, params, t_tol)
        if found is None:
            continue
        shift, neighbor, tm_i = found
        try:
            hair_i = trace_hair(neighbor, default_t_grid(tm_i, span, grid_count), depth, params, tol=t_tol)
        except (DomainError, NoHairError):
            continue
        length_i = hair_i.length_spherical
        err = abs(length_i - c)
        if length_tol is not None and err > length_tol:
            continue
        ep = hair_i.samples[0][1]
        witnesses.append(
            DensityWitness(
                index=i,
                shift=shift,
                address=neighbor,
                t_min=tm_i,
                endpoint=ep,
                length=length_i,
                length_error=err,
                distance=float(np.linalg.norm(ep - p_star)),
            )
        )
    return witnesses


_MAX_SHIFT = 10 ** 200


def _tune_neighbor(address, i, t_c, depth, params, t_tol):
    """Find the decrement at index ``i`` whose t_min lands nearest t_c."""
    n1, n2 = address[i]

    def tm_of(m: int) -> float:
        neighbor = address.with_symbol(i, (n1, n2 - 2 * m))
        return t_min(neighbor, depth, t_tol, params)

    lo_m, lo_tm = 1, tm_of(1)
    if lo_tm > t_c:
        best = 1 if math.isfinite(lo_tm) else None
        if best is None:
            return None
        return (1, address.with_symbol(i, (n1, n2 - 2)), lo_tm)
    # exponential search for the first shift overshooting t_c
    hi_m = 2
    hi_tm = tm_of(hi_m)
    while hi_tm <= t_c:
        if hi_m > _MAX_SHIFT:
            return None  # chain at this index is beyond tunable float range
        lo_m, lo_tm = hi_m, hi_tm
        hi_m *= 4
        hi_tm = tm_of(hi_m)
    while hi_m - lo_m > 1:
        mid = (lo_m + hi_m) // 2
        mid_tm = tm_of(mid)
        if mid_tm <= t_c:
            lo_m, lo_tm = mid, mid_tm
        else:
            hi_m, hi_tm = mid, mid_tm
    # choose the closer side, preferring a finite t_min
    cand = []
    if math.isfinite(lo_tm):
        cand.append((abs(lo_tm - t_c), lo_m, lo_tm))
    if math.isfinite(hi_tm):
        cand.append((abs(hi_tm - t_c), hi_m, hi_tm))
    if not cand:
        return None
    _, m, tm_i = min(cand)
    return (m, address.with_symbol(i, (n1, n2 - 2 * m)), tm_i)
