"""Averaging operators along horocycles and the convergence experiments.

Horocycle ball averages can be weighted by the Bowen-Margulis conditional
measure (flow-pushed averages) or by arc length (ratio ergodic averages).
The radius-r evaluation grid is always r times a fixed unit grid, so
pushing a ball forward by the geodesic flow maps grid to grid exactly and
the scaling identity between the two average routes holds to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import AtomicBoundaryMeasure
from .errors import EmptySupport, ZeroDenominator
from .hypgeom import (
    GroupElement,
    frame_hopf_arr,
    flow_frames_arr,
    hopf_frame_arr,
    horocycle_frames_arr,
)
from .measures import FlowBox, HorocycleConditional, QuadratureMeasure, bm_conditional
from .schottky import SchottkyData, reduce_frames_arr

_CHUNK = 400_000


def _bump(u):
    u = np.minimum(np.abs(np.asarray(u, dtype=float)), 1.0 - 1e-12)
    out = np.exp(1.0 - 1.0 / (1.0 - u * u))
    return np.where(u < 1.0 - 2e-12, out, 0.0)


@dataclass(frozen=True)
class TestFunction:
    """Smooth bump in Hopf coordinates on the quotient.

    Supported where all three of |xi_minus - center|, |xi_plus - center|,
    |t - center| are below the widths; evaluated at arbitrary frames by
    reducing to the fundamental domain first.  widths = None gives the
    constant function equal to height.
    """

    __test__ = False  # not a test case despite the name

    name: str
    center: tuple = (0.0, 0.0, 0.0)
    widths: tuple | None = None
    height: float = 1.0

    def eval_hopf(self, xi_minus, xi_plus, t):
        if self.widths is None:
            return np.full(np.shape(t), self.height)
        cm, cp, ct = self.center
        wm, wp, wt = self.widths
        return self.height * (
            _bump((np.asarray(xi_minus) - cm) / wm)
            * _bump((np.asarray(xi_plus) - cp) / wp)
            * _bump((np.asarray(t) - ct) / wt)
        )

    def eval_frames(self, S: SchottkyData, frames: np.ndarray) -> np.ndarray:
        if self.widths is None:
            return np.full(frames.shape[:-2], self.height)
        frames = np.asarray(frames, dtype=float)
        flat = frames.reshape(-1, 2, 2)
        out = np.empty(flat.shape[0])
        for lo in range(0, flat.shape[0], _CHUNK):
            sl = slice(lo, min(lo + _CHUNK, flat.shape[0]))
            red, _, _ = reduce_frames_arr(S, flat[sl])
            xm, xp, t = frame_hopf_arr(red)
            out[sl] = self.eval_hopf(xm, xp, t)
        return out.reshape(frames.shape[:-2])

    @property
    def sup_norm(self) -> float:
        return abs(self.height)


def standard_suite(S: SchottkyData):
    """Five bumps spread over the nonwandering part of the default-style
    domain, centered on disk-to-disk geodesics and kept away from the
    disk boundaries."""
    c = [d.center for _, d in S._disks]
    r = [d.radius for _, d in S._disks]
    mk = lambda i, j, t0, name: TestFunction(
        name,
        center=(c[i], c[j], t0),
        widths=(0.9 * r[i], 0.9 * r[j], 1.4),
    )
    return [
        mk(1, 0, 0.0, "phi1"),
        mk(1, 2, 0.0, "phi2"),
        mk(0, 2, 0.0, "phi3"),
        mk(1, 0, 0.6, "phi4"),
        mk(1, 2, -0.6, "phi5"),
    ]


@dataclass(frozen=True)
class AverageResult:
    value: float
    r: float
    t: float
    weighting: str
    frame: GroupElement
    atom_count: int

    def __post_init__(self):
        if self.atom_count <= 0:
            raise ValueError("average needs at least one atom")
        if not math.isfinite(self.value):
            raise ValueError("average value must be finite")


def unit_grid(resolution: int) -> np.ndarray:
    """Midpoint grid on [-1, 1]; radius-r ball grids are r times this."""
    return (np.arange(resolution) + 0.5) * (2.0 / resolution) - 1.0


def _ball_frames(F: GroupElement, s: np.ndarray, t: float) -> np.ndarray:
    frames = horocycle_frames_arr(F, s)
    if t != 0.0:
        frames = flow_frames_arr(frames, t)
    return frames


def m_average(S: SchottkyData, F: GroupElement, r: float, t: float,
              phi: TestFunction, weighting: str = "BM-conditional",
              conditional: HorocycleConditional | None = None,
              resolution: int = 4096) -> AverageResult:
    """Normalized average of phi over the flow-pushed horocycle ball
    {F n_s a_t : |s| <= r}.

    With BM-conditional weighting the atoms and masses come from the given
    HorocycleConditional (its radius must cover r); with Lebesgue weighting
    the ball is sampled on the uniform radius-r grid.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if weighting == "BM-conditional":
        if conditional is None:
            raise ValueError("BM-conditional weighting needs a conditional")
        keep = np.abs(conditional.s) <= r
        s = conditional.s[keep]
        w = conditional.weights[keep]
        if s.size == 0 or w.sum() <= 0:
            raise EmptySupport("no conditional mass in the ball")
    elif weighting == "Lebesgue":
        s = r * unit_grid(resolution)
        w = np.full(s.shape, 2.0 * r / resolution)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    vals = phi.eval_frames(S, _ball_frames(F, s, t))
    value = float(np.dot(w, vals) / w.sum())
    return AverageResult(value=value, r=r, t=t, weighting=weighting,
                         frame=F, atom_count=int(s.size))


def ratio_average(S: SchottkyData, F: GroupElement, r: float,
                  phi: TestFunction, psi: TestFunction,
                  resolution: int = 1_000_000) -> float:
    """Ratio of arc-length horocycle ball integrals of phi and psi at F."""
    s = r * unit_grid(resolution)
    ds = 2.0 * r / resolution
    num = 0.0
    den = 0.0
    for lo in range(0, resolution, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, resolution))
        red, _, _ = reduce_frames_arr(S, horocycle_frames_arr(F, s[sl]))
        xm, xp, t = frame_hopf_arr(red)
        num += float(phi.eval_hopf(xm, xp, t).sum()) * ds
        den += float(psi.eval_hopf(xm, xp, t).sum()) * ds
    if abs(den) < 1e-12 * (2.0 * r):
        raise ZeroDenominator("psi ball integral vanishes at this radius")
    return num / den


def correlation(S: SchottkyData, Q: QuadratureMeasure, t: float,
                phi: TestFunction, psi: TestFunction) -> float:
    """Mixing correlation ∫ phi · (psi ∘ a_t) dQ̂ with Q̂ = Q normalized."""
    total = 0.0
    n = Q.atom_count
    for lo in range(0, n, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, n))
        frames = hopf_frame_arr(Q.xi_minus[sl], Q.xi_plus[sl], Q.t[sl])
        red, _, _ = reduce_frames_arr(S, frames)
        xm, xp, tt = frame_hopf_arr(red)
        pv = phi.eval_hopf(xm, xp, tt)
        red2, _, _ = reduce_frames_arr(S, flow_frames_arr(frames, t))
        xm2, xp2, tt2 = frame_hopf_arr(red2)
        qv = psi.eval_hopf(xm2, xp2, tt2)
        total += float(np.dot(Q.weights[sl], pv * qv))
    return total / Q.total_mass


def mean_value(S: SchottkyData, Q: QuadratureMeasure, phi: TestFunction) -> float:
    """∫ phi dQ̂ with Q̂ = Q normalized to a probability."""
    total = 0.0
    n = Q.atom_count
    for lo in range(0, n, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, n))
        frames = hopf_frame_arr(Q.xi_minus[sl], Q.xi_plus[sl], Q.t[sl])
        red, _, _ = reduce_frames_arr(S, frames)
        xm, xp, tt = frame_hopf_arr(red)
        total += float(np.dot(Q.weights[sl], phi.eval_hopf(xm, xp, tt)))
    return total / Q.total_mass


def empirical_transverse(S: SchottkyData, F: GroupElement, box: FlowBox,
                         r: float, nu_o: AtomicBoundaryMeasure, delta: float,
                         resolution: int = 1_000_000):
    """Empirical transverse measure of the horocycle segment of radius r.

    Walks {F n_s : |s| <= r} on a fine grid, records one Dirac mass per
    maximal box-crossing at the plaque it crosses, and normalizes by the
    Bowen-Margulis conditional mass of the ball.  Returns a list of
    (plaque index, normalized count).
    """
    mu = bm_conditional(F, nu_o, delta, radius=r)
    ball_mass = mu.total_mass
    if ball_mass <= 0:
        raise EmptySupport("conditional ball mass vanishes")
    s = r * unit_grid(resolution)
    counts = np.zeros(box.n_plaques)
    prev_cell = -1
    for lo in range(0, resolution, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, resolution))
        red, _, _ = reduce_frames_arr(S, horocycle_frames_arr(F, s[sl]))
        xm, xp, t = frame_hopf_arr(red)
        inside = box.contains(xm, xp, t)
        cell = np.where(inside, box.cell_index(xm, t), -1)
        for c in cell:
            if c >= 0 and c != prev_cell:
                counts[c] += 1.0
            prev_cell = c
    counts /= ball_mass
    return [(int(i), float(m)) for i, m in enumerate(counts) if m > 0]


def annulus_error(S: SchottkyData, F: GroupElement,
                  nu_o: AtomicBoundaryMeasure, delta: float,
                  r: float, r0: float, phi_bound: float = 1.0) -> float:
    """Relative conditional mass of the radius-r0 annulus around the
    radius-r horocycle ball, times the sup bound of the test function."""
    if not 0 <= r0 < r:
        raise ValueError("need 0 <= r0 < r")
    if r0 == 0:
        return 0.0
    mu = bm_conditional(F, nu_o, delta, radius=r + r0)
    ball = mu.mass_within(r)
    if ball <= 0:
        raise EmptySupport("conditional ball mass vanishes")
    annulus = mu.mass_within(r + r0) - mu.mass_within(r - r0)
    return phi_bound * annulus / ball


def perturb_radius(mu: HorocycleConditional, r: float,
                   rng: np.random.Generator, shell: float = 1e-3,
                   threshold: float = 1e-6, max_tries: int = 64) -> float:
    """Deterministically perturb r until the shell of relative width
    `shell` around |s| = r carries less than `threshold` of the ball mass.

    Realizes the radius-selection freedom (all but countably many radii
    have boundary mass zero) constructively for atomic conditionals.
    """
    ball = mu.mass_within(r)
    for _ in range(max_tries):
        if ball > 0:
            boundary = ball - mu.mass_within(r * (1 - shell))
            boundary += mu.mass_within(r * (1 + shell)) - ball
            if boundary <= threshold * ball:
                return r
        r = r * float(rng.uniform(0.95, 1.05))
        ball = mu.mass_within(r)
    return r


def _random_word(S: SchottkyData, rng: np.random.Generator, depth: int,
                 first: int | None = None):
    letters = [] if first is None else [first]
    choices = [l for i in range(1, S.m + 1) for l in (i, -i)]
    while len(letters) < depth:
        l = choices[rng.integers(0, len(choices))]
        if letters and l == -letters[-1]:
            continue
        letters.append(l)
    return tuple(letters)


def omega_frame(S: SchottkyData, rng: np.random.Generator,
                depth: int = 12) -> GroupElement:
    """A frame in the nonwandering set: both endpoints are depth-`depth`
    limit points with distinct leading letters, Hopf time 0.  Such frames
    carry nonempty Bowen-Margulis conditionals on their N-orbits."""
    from .hypgeom import BoundaryPoint, HopfCoord, hopf_to_frame
    from .schottky import limit_point

    choices = [l for i in range(1, S.m + 1) for l in (i, -i)]
    w_minus = _random_word(S, rng, depth)
    first = choices[rng.integers(0, len(choices))]
    while first == w_minus[0]:
        first = choices[rng.integers(0, len(choices))]
    w_plus = _random_word(S, rng, depth, first=first)
    xi = limit_point(S, w_minus)
    eta = limit_point(S, w_plus)
    return hopf_to_frame(HopfCoord(xi, eta, 0.0))


def radial_frame(S: SchottkyData, rng: np.random.Generator,
                 depth: int = 4, tail: int = 1) -> GroupElement:
    """A radial frame: a random length-`depth` prefix followed by the
    letter `tail` repeated forever, so the backward geodesic spirals onto
    the axis of that generator and returns to the core at every scale.
    The forward endpoint is uniform outside the disks, Hopf time 0.

    The constant tail pins which disk the backward endpoint of the
    reduced frame visits at deep scales; window averages of functions
    carried by that disk then receive contributions from every dyadic
    range of the horocycle parameter instead of from a single excursion.
    """
    from .hypgeom import BoundaryPoint, HopfCoord, hopf_to_frame
    from .schottky import limit_point

    while True:
        letters = list(_random_word(S, rng, depth))
        if letters[-1] != -tail:
            break
    letters.append(tail)
    xi = limit_point(S, tuple(letters))
    lo = float(np.min(S._centers - S._radii)) - 2.0
    hi = float(np.max(S._centers + S._radii)) + 2.0
    while True:
        eta = float(rng.uniform(lo, hi))
        outside = np.all(np.abs(eta - S._centers) > S._radii + 0.05)
        if outside and abs(eta - xi.value) > 0.5:
            break
    return hopf_to_frame(HopfCoord(xi, BoundaryPoint(eta), 0.0))


def ratio_suite(S: SchottkyData, nu) -> list:
    """Three test functions carried by the backward disk of generator 1.

    Two are forward bumps over whole paired disks; the third sits on the
    heavier sub-cluster of `nu` inside the first disk (located by mass
    quantiles), probing the ratio limit below the single-disk scale.
    """
    c = [d.center for _, d in S._disks]
    r = [d.radius for _, d in S._disks]
    xs, w = nu.finite_arrays()
    d0 = S._disks[0][1]
    inside = np.abs(xs - d0.center) < d0.radius
    p, ww = xs[inside].real, w[inside]
    order = np.argsort(p)
    p, ww = p[order], ww[order]
    cum = np.cumsum(ww) / ww.sum()
    qlo, qhi = np.interp([0.1, 0.4], cum, p)
    return [
        TestFunction("ratioA", center=(c[1], c[0], 0.0),
                     widths=(0.9 * r[1], 0.9 * r[0], 1.4)),
        TestFunction("ratioB", center=(c[1], c[2], 0.0),
                     widths=(0.9 * r[1], 0.9 * r[2], 1.4)),
        TestFunction("ratioL", center=(c[1], (qlo + qhi) / 2, 0.0),
                     widths=(0.9 * r[1], (qhi - qlo) / 2 * 1.3, 1.4)),
    ]


def window_integrals(S: SchottkyData, F: GroupElement, r: float,
                     funcs, resolution: int) -> np.ndarray:
    """Arc-length integrals of each function over the horocycle ball of
    radius r at F."""
    s = r * unit_grid(resolution)
    ds = 2.0 * r / resolution
    sums = np.zeros(len(funcs))
    for lo in range(0, resolution, _CHUNK):
        sl = slice(lo, min(lo + _CHUNK, resolution))
        red, _, _ = reduce_frames_arr(S, horocycle_frames_arr(F, s[sl]))
        xm, xp, t = frame_hopf_arr(red)
        for j, f in enumerate(funcs):
            sums[j] += float(f.eval_hopf(xm, xp, t).sum()) * ds
    return sums


def ratio_base_frames(S: SchottkyData, rng: np.random.Generator, funcs,
                      n: int = 3, probe_radius: float = math.e ** 3,
                      max_tries: int = 60) -> list:
    """Radial frames whose probe window already meets every function.

    A frame whose horocycle ball at the probe radius misses the support of
    some function cannot define the corresponding ratio, so candidates are
    screened with a cheap window integral before being accepted.
    """
    out = []
    for _ in range(max_tries):
        if len(out) >= n:
            break
        F = radial_frame(S, rng)
        if (window_integrals(S, F, probe_radius, funcs, 100_000) > 0).all():
            out.append(F)
    if len(out) < n:
        raise EmptySupport(
            f"found only {len(out)} of {n} usable radial base frames")
    return out
