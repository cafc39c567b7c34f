"""Boundary measures: Poincare series, critical exponent, conformal densities.

The Patterson-Sullivan family is approximated at a finite word-length cutoff
by atoms sitting at the radial projections of orbit points, with weights
exp(-delta * d(x, orbit point)).  The Lebesgue family is discretized by
equally spaced directions on the unit circle of the basepoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDepth
from .hypgeom import (
    ORIGIN,
    BoundaryPoint,
    HPoint,
    busemann,
    busemann_arr,
    dist_arr,
    frame_base_arr,
)
from .schottky import SchottkyData, level_matrices


@dataclass
class AtomicBoundaryMeasure:
    """Weighted atoms on the boundary circle (np.inf = point at infinity).

    Atoms are kept sorted by boundary coordinate with infinity last, so
    iteration order is deterministic.
    """

    positions: np.ndarray
    weights: np.ndarray
    basepoint: HPoint
    exponent: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if pos.shape != w.shape:
            raise ValueError("positions and weights must have matching shapes")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not w.sum() > 0:
            raise ValueError("total mass must be positive")
        order = np.argsort(pos, kind="stable")  # inf sorts last
        self.positions = pos[order]
        self.weights = w[order]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def atom_count(self) -> int:
        return int(self.weights.size)

    def atoms(self):
        for p, w in zip(self.positions, self.weights):
            yield BoundaryPoint(p), float(w)

    def finite_arrays(self):
        """(positions, weights) of the finite atoms only."""
        fin = np.isfinite(self.positions)
        return self.positions[fin], self.weights[fin]

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(
                f"# basepoint=({self.basepoint.x!r},{self.basepoint.y!r})"
                f" exponent={self.exponent!r}"
                f" cutoff={self.provenance.get('cutoff', '')}\n"
            )
            fh.write("xi,weight\n")
            for p, w in zip(self.positions, self.weights):
                xi = "inf" if math.isinf(p) else format(p, ".17g")
                fh.write(f"{xi},{format(w, '.17g')}\n")


@dataclass(frozen=True)
class DeltaEstimate:
    """Critical exponent estimate with counting-based bracket."""

    value: float
    lower: float
    upper: float
    method: str

    def __post_init__(self):
        if not (self.lower <= self.value <= self.upper):
            raise ValueError("bracket must contain the value")
        if not (0.0 < self.value < 1.0):
            raise ValueError("critical exponent must lie in (0, 1) for these groups")


# ---------------------------------------------------------------------------
# orbit enumeration helpers
# ---------------------------------------------------------------------------

def orbit_distances_by_level(S: SchottkyData, k: int):
    """List of arrays d(o, gamma o) per word length 0..k (level 0 = [0])."""
    out = []
    o = complex(ORIGIN.x, ORIGIN.y)
    for level, mats, _ in level_matrices(S, k):
        out.append(dist_arr(frame_base_arr(mats), o))
    return out


def orbit_points(S: SchottkyData, k: int) -> np.ndarray:
    """Complex orbit points gamma o for all words of length 1..k."""
    chunks = []
    for level, mats, _ in level_matrices(S, k):
        if level == 0:
            continue
        chunks.append(frame_base_arr(mats))
    return np.concatenate(chunks)


def level_orbit_points(S: SchottkyData, k: int) -> np.ndarray:
    """Complex orbit points gamma o for words of length exactly k."""
    for level, mats, _ in level_matrices(S, k):
        pass
    return frame_base_arr(mats)


def ray_endpoints(x: HPoint, q: np.ndarray) -> np.ndarray:
    """Forward boundary endpoints of rays from x through points q (complex)."""
    q = np.asarray(q, dtype=complex)
    dx = q.real - x.x
    vertical = dx == 0.0
    safe_dx = np.where(vertical, 1.0, dx)
    c = (q.real ** 2 + q.imag ** 2 - x.x ** 2 - x.y ** 2) / (2.0 * safe_dx)
    r = np.hypot(x.x - c, x.y)
    xi = c + r * np.sign(safe_dx)
    up = q.imag > x.y
    return np.where(vertical, np.where(up, np.inf, x.x), xi)


# ---------------------------------------------------------------------------
# Poincare series and critical exponent
# ---------------------------------------------------------------------------

def poincare_partial(S: SchottkyData, s: float, k: int) -> float:
    """Partial Poincare series sum_{|gamma| <= k} exp(-s d(o, gamma o))."""
    if k < 0:
        raise ValueError("cutoff must be >= 0")
    if s < 0:
        raise ValueError("exponent must be >= 0")
    total = 0.0
    for dists in orbit_distances_by_level(S, k):
        total += float(np.exp(-s * dists).sum())
    return total


def _counting_slope(dists_sorted: np.ndarray, r_lo: float, r_hi: float, npts: int = 64):
    rs = np.linspace(r_lo, r_hi, npts)
    counts = np.searchsorted(dists_sorted, rs, side="right")
    logn = np.log(counts.astype(float))
    slope = np.polyfit(rs, logn, 1)[0]
    return float(slope)


def _series_crossing(level_dists, s_lo=1e-6, s_hi=1.5, iters=60) -> float:
    """s where the deepest per-level ratio of the Poincare series crosses 1."""
    deep = level_dists[-3:]

    def log_ratio(s):
        sums = [np.exp(-s * d).sum() for d in deep]
        return math.log(sums[-1] / sums[0]) / (len(deep) - 1)

    lo, hi = s_lo, s_hi
    if log_ratio(lo) < 0 or log_ratio(hi) > 0:
        raise InsufficientDepth("per-level ratio does not bracket 1 on (0, 1.5)")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if log_ratio(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_delta(S: SchottkyData, k: int) -> DeltaEstimate:
    """Critical exponent via two estimators.

    (a) counting: the slope of log #{gamma : d(o, gamma o) <= R} over the
    range of R where the enumerated ball is complete; slopes over
    sub-windows give the [lower, upper] bracket.
    (b) series-bisection: the s at which the deepest per-level ratio of
    the Poincare series crosses 1; returned as the value.
    """
    if k < 6:
        raise ValueError("cutoff must be >= 6")
    level_dists = orbit_distances_by_level(S, k)
    value = _series_crossing(level_dists)

    dists = np.sort(np.concatenate(level_dists[1:]))
    r_complete = float(level_dists[-1].min())
    windows = [(0.7, 1.0), (0.7, 0.85), (0.85, 1.0)]
    slopes = [
        _counting_slope(dists, lo * r_complete, hi * r_complete)
        for lo, hi in windows
    ]
    spread = max(slopes) - min(slopes)
    margin = spread + 0.01 * max(slopes)
    lower = min(slopes) - margin
    upper = max(slopes) + margin
    if not (lower <= value <= upper):
        raise InsufficientDepth(
            f"counting bracket [{lower:.4f}, {upper:.4f}] does not contain "
            f"series estimate {value:.4f}; increase the cutoff"
        )
    return DeltaEstimate(value=value, lower=lower, upper=upper, method="series-bisection")


# ---------------------------------------------------------------------------
# conformal families
# ---------------------------------------------------------------------------

def build_ps_measure(S: SchottkyData, x: HPoint, delta: float, k: int) -> AtomicBoundaryMeasure:
    """Finite-cutoff Patterson-Sullivan measure at basepoint x.

    Atoms sit at the boundary endpoints of rays from x through the orbit
    points of words of length exactly k, with weights exp(-delta d(x, gamma o)).
    Using a single word length (instead of all lengths up to k) makes the
    conformal pushforward of the atom family land on the neighboring level
    rather than truncate at a hard edge, which is what keeps the group
    quasi-invariance of downstream quadratures at the sub-percent level.
    The normalization constant makes the basepoint-o measure a probability
    and is shared across basepoints so cross-basepoint weight ratios realize
    the conformal cocycle.
    """
    if k < 1:
        raise ValueError("cutoff must be >= 1")
    q = level_orbit_points(S, k)
    o = complex(ORIGIN.x, ORIGIN.y)
    norm = float(np.exp(-delta * dist_arr(q, o)).sum())
    w = np.exp(-delta * dist_arr(q, complex(x.x, x.y))) / norm
    xi = ray_endpoints(x, q)
    return AtomicBoundaryMeasure(
        positions=xi,
        weights=w,
        basepoint=x,
        exponent=delta,
        provenance={"cutoff": k, "kind": "patterson-sullivan"},
    )


def lebesgue_density(x: HPoint, y: HPoint, xi: BoundaryPoint) -> float:
    """Radon-Nikodym derivative d lambda_y / d lambda_x at xi (n = 2)."""
    return math.exp(busemann(xi, x, y))


def discretize_lebesgue(x: HPoint, resolution: int) -> AtomicBoundaryMeasure:
    """Lebesgue measure on the unit circle at x, seen on the boundary.

    Atoms at the endpoints of `resolution` equally spaced directions, each
    of weight 2*pi/resolution.  The midpoint grid avoids the vertical
    direction, so all atoms are finite.
    """
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    j = np.arange(resolution)
    theta = -math.pi + (j + 0.5) * (2.0 * math.pi / resolution)
    xi = x.x + x.y * np.tan(0.5 * theta + 0.25 * math.pi)
    w = np.full(resolution, 2.0 * math.pi / resolution)
    return AtomicBoundaryMeasure(
        positions=xi,
        weights=w,
        basepoint=x,
        exponent=1.0,
        provenance={"resolution": resolution, "kind": "lebesgue"},
    )


def coarsen(measure: AtomicBoundaryMeasure, S: SchottkyData, per_disk: int) -> AtomicBoundaryMeasure:
    """Merge atoms into at most `per_disk` equal-mass bins inside each
    ping-pong disk (weighted-mean positions, mass preserved).

    Atoms outside every disk (including infinity) are kept as they are.
    Keeps quadrature pair counts manageable without biasing disk masses.
    """
    pos, w = measure.positions, measure.weights
    fin = np.isfinite(pos)
    assigned = np.zeros(pos.shape, dtype=bool)
    out_pos, out_w = [], []
    for _, disk in S._disks:
        in_disk = fin & (np.abs(pos - disk.center) < disk.radius) & ~assigned
        assigned |= in_disk
        p, ww = pos[in_disk], w[in_disk]
        if p.size == 0:
            continue
        order = np.argsort(p, kind="stable")
        p, ww = p[order], ww[order]
        cum = np.cumsum(ww)
        edges = np.linspace(0.0, cum[-1], per_disk + 1)[1:-1]
        idx = np.searchsorted(cum, edges, side="left")
        groups = np.split(np.arange(p.size), np.unique(idx))
        for g in groups:
            if g.size == 0:
                continue
            mass = ww[g].sum()
            if mass <= 0:
                continue
            out_pos.append(float((p[g] * ww[g]).sum() / mass))
            out_w.append(float(mass))
    rest = ~assigned
    out_pos.extend(pos[rest].tolist())
    out_w.extend(w[rest].tolist())
    prov = dict(measure.provenance)
    prov["coarsened_per_disk"] = per_disk
    return AtomicBoundaryMeasure(
        positions=np.array(out_pos),
        weights=np.array(out_w),
        basepoint=measure.basepoint,
        exponent=measure.exponent,
        provenance=prov,
    )


# ---------------------------------------------------------------------------
# symbolic coding and equivariance diagnostics
# ---------------------------------------------------------------------------

def cylinder_index(S: SchottkyData, xs: np.ndarray, depth: int):
    """Depth-letter cylinder index of each finite boundary point.

    A point in disk j is pulled back by the inverse of the generator owning
    that disk and the next letter is read off; points that fall outside all
    disks at some step are flagged invalid.  Returns (index, valid) with
    index in base 2m over the disk order of ``S._disks``.
    """
    idx = np.zeros(len(xs), dtype=np.int64)
    z = np.asarray(xs, dtype=complex).copy()
    ok = np.ones(len(xs), dtype=bool)
    n_disks = len(S._disks)
    for _ in range(depth):
        which = np.full(len(z), -1)
        for j, (sgn, disk) in enumerate(S._disks):
            inside = np.abs(z - disk.center) <= disk.radius
            which[inside] = j
        ok &= which >= 0
        idx = idx * n_disks + np.where(which >= 0, which, 0)
        zn = z.copy()
        for j, (sgn, disk) in enumerate(S._disks):
            sel = which == j
            if not sel.any():
                continue
            m = S.generators[abs(sgn) - 1].matrix
            if sgn > 0:
                a, b, c, d = m.d, -m.b, -m.c, m.a
            else:
                a, b, c, d = m.a, m.b, m.c, m.d
            zn[sel] = (a * z[sel] + b) / (c * z[sel] + d)
        z = zn
    return idx, ok


def equivariance_deviation(S: SchottkyData, nu: AtomicBoundaryMeasure,
                           delta: float, depth: int = 3) -> float:
    """Median relative defect of gamma_* nu against the conformal prediction.

    For each generator g (and its inverse) the atoms are pushed forward and
    reweighted by exp(delta * busemann(xi; x, g^{-1} x)); the mass of every
    depth-letter cylinder is then compared against the unpushed mass.  The
    median over cylinders and group elements quantifies how far the
    finite-cutoff family is from an exactly conformal one, and shrinks as
    the cutoff grows.
    """
    xs, w = nu.finite_arrays()
    x0 = complex(nu.basepoint.x, nu.basepoint.y)
    ci, ok1 = cylinder_index(S, xs, depth)
    ncyl = len(S._disks) ** depth
    direct = np.bincount(ci[ok1], weights=w[ok1], minlength=ncyl)
    keep = direct > 1e-12 * direct.sum()
    devs = []
    for gen in S.generators:
        m = gen.matrix
        pairs = (
            ((m.a, m.b, m.c, m.d), (m.d * x0 - m.b) / (-m.c * x0 + m.a)),
            ((m.d, -m.b, -m.c, m.a), (m.a * x0 + m.b) / (m.c * x0 + m.d)),
        )
        for (a, b, c, d), pulled in pairs:
            dens = np.exp(delta * busemann_arr(xs, x0, pulled))
            pushed = (a * xs + b) / (c * xs + d)
            cp, ok2 = cylinder_index(S, pushed, depth)
            both = ok1 & ok2
            push = np.bincount(cp[both], weights=(w * dens)[both], minlength=ncyl)
            devs.append(np.abs(push[keep] / direct[keep] - 1.0))
    return float(np.median(np.concatenate(devs)))


def support_interval(S: SchottkyData, measure: AtomicBoundaryMeasure,
                     disk_index: int, q_lo: float = 0.05,
                     q_hi: float = 0.95) -> tuple:
    """Interval holding the [q_lo, q_hi] mass quantiles of the measure
    restricted to the given disk (by S._disks order)."""
    disk = S._disks[disk_index][1]
    xs, w = measure.finite_arrays()
    m = np.abs(xs - disk.center) < disk.radius
    p, ww = xs[m].real, w[m]
    if p.size == 0:
        raise InsufficientDepth("no atoms inside the requested disk")
    order = np.argsort(p)
    p, ww = p[order], ww[order]
    cum = np.cumsum(ww) / ww.sum()
    lo, hi = np.interp([q_lo, q_hi], cum, p)
    return float(lo), float(hi)
