"""Exact geometry of the hyperbolic upper half-plane.

Conventions (fixed once, machine-checked by the test suite):

* base point ``o = (0, 1)``, i.e. ``i`` in the complex chart;
* the identity frame is the upward unit vector at ``o``; its geodesic runs
  from boundary point 0 to the point at infinity;
* ``a_t = diag(e^{t/2}, e^{-t/2})`` generates the geodesic flow by right
  multiplication;
* ``n_s = [[1, 0], [s, 1]]`` generates the horocycle flow; it satisfies
  ``a_t n_s a_{-t} = n_{s e^{-t}}``, so N-orbits are the strong unstable
  leaves of the flow.

Matrices are unit-determinant up to sign (projective identification); the
canonical representative has its first nonzero entry nonnegative.

Scalar operations wrap vectorized kernels (suffix ``_arr``) that work on
numpy arrays of boundary points, half-plane points (as complex numbers with
positive imaginary part) and frames (arrays of shape ``(..., 2, 2)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_DET_TOL = 1e-12
# below this (relative to squared max-norm) the determinant of a float
# matrix is cancellation-dominated and dividing by sqrt(det) only amplifies
# noise; keep the scale-normalized projective representative instead
_DET_NOISE = 1e-9
_SIGN_TOL = 1e-14

INF = math.inf


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    """A point of the boundary circle R ∪ {∞}."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v):
            raise ValueError("boundary point cannot be NaN")
        if math.isinf(v):
            v = INF  # single point at infinity
        object.__setattr__(self, "value", v)

    @property
    def is_infinity(self) -> bool:
        return math.isinf(self.value)

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return "BoundaryPoint(∞)" if self.is_infinity else f"BoundaryPoint({self.value})"


BOUNDARY_INFINITY = BoundaryPoint(INF)


@dataclass(frozen=True)
class HPoint:
    """A point of the upper half-plane, y > 0 strictly."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"HPoint requires y > 0, got y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)


ORIGIN = HPoint(0.0, 1.0)


@dataclass(frozen=True)
class GroupElement:
    """A real 2x2 unit-determinant matrix up to sign (element of PSL(2,R))."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if not (scale > 0 and math.isfinite(scale)):
            raise ValueError("degenerate matrix")
        # scale by a power of two: exact division, keeps integer-exact words exact
        scale = math.ldexp(1.0, math.frexp(scale)[1])
        a, b, c, d = self.a / scale, self.b / scale, self.c / scale, self.d / scale
        det = a * d - b * c
        # For long hyperbolic words |det| << norm^2 and the determinant is
        # below float cancellation noise; keep the scale-normalized projective
        # representative in that regime instead of dividing by sqrt(det).
        if det > _DET_NOISE:
            s = 1.0 / math.sqrt(det)
            a, b, c, d = a * s, b * s, c * s, d * s
        elif det < -0.1:
            # clearly orientation-reversing, not cancellation noise
            raise ValueError(f"matrix must have positive determinant, got {det * scale * scale}")
        # canonical projective sign: first entry with |.| above tolerance is >= 0
        for v in (a, b, c, d):
            if abs(v) > _SIGN_TOL:
                if v < 0:
                    a, b, c, d = -a, -b, -c, -d
                break
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    def mul(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __matmul__ = mul

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @classmethod
    def from_array(cls, m) -> "GroupElement":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def _unit_scale(self):
        s = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return (self.a / s, self.b / s, self.c / s, self.d / s)

    def proj_distance(self, other: "GroupElement") -> float:
        """Max entry difference between unit-max-norm canonical representatives."""
        u, v = self._unit_scale(), other._unit_scale()
        return max(abs(x - y) for x, y in zip(u, v))

    def almost_equal(self, other: "GroupElement", tol: float = 1e-9) -> bool:
        return self.proj_distance(other) <= tol


IDENTITY = GroupElement(1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class HopfCoord:
    """Hopf coordinates (backward endpoint, forward endpoint, Busemann time)."""

    xi_minus: BoundaryPoint
    xi_plus: BoundaryPoint
    t: float

    def __post_init__(self):
        if self.xi_minus == self.xi_plus:
            raise ValueError("Hopf coordinates require distinct endpoints")


def flow_element(t: float) -> GroupElement:
    """The diagonal element a_t = diag(e^{t/2}, e^{-t/2})."""
    e = math.exp(t / 2.0)
    return GroupElement(e, 0.0, 0.0, 1.0 / e)


def horocycle_element(s: float) -> GroupElement:
    """The unipotent element n_s = [[1, 0], [s, 1]]."""
    return GroupElement(1.0, 0.0, s, 1.0)


# ---------------------------------------------------------------------------
# vectorized kernels
# ---------------------------------------------------------------------------

def log_poisson_arr(z, xi):
    """log P(z, xi) with P(z, xi) = y / ((x - xi)^2 + y^2), P(z, ∞) = y.

    ``z``: complex array of half-plane points; ``xi``: float array, with
    np.inf for the point at infinity.
    """
    z = np.asarray(z, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    y = z.imag
    fin = np.isfinite(xi)
    dx = np.where(fin, z.real - np.where(fin, xi, 0.0), 1.0)
    denom = dx * dx + y * y
    return np.where(fin, np.log(y) - np.log(denom), np.log(y))


def busemann_arr(xi, p, q):
    """Busemann cocycle β_ξ(p, q) for arrays (p, q complex, xi float)."""
    return log_poisson_arr(q, xi) - log_poisson_arr(p, xi)


def dist_arr(p, q):
    """Hyperbolic distance between complex arrays of half-plane points."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    d2 = (p.real - q.real) ** 2 + (p.imag - q.imag) ** 2
    return np.arccosh(1.0 + d2 / (2.0 * p.imag * q.imag))


def mobius_point_arr(frames, z):
    """Apply frames (..., 2, 2) to complex half-plane points."""
    frames = np.asarray(frames, dtype=float)
    z = np.asarray(z, dtype=complex)
    a, b = frames[..., 0, 0], frames[..., 0, 1]
    c, d = frames[..., 1, 0], frames[..., 1, 1]
    return (a * z + b) / (c * z + d)


def mobius_boundary_arr(frames, xi):
    """Apply frames to boundary points (np.inf allowed); returns float array."""
    frames = np.asarray(frames, dtype=float)
    xi = np.asarray(xi, dtype=float)
    a, b = frames[..., 0, 0], frames[..., 0, 1]
    c, d = frames[..., 1, 0], frames[..., 1, 1]
    fin = np.isfinite(xi)
    xs = np.where(fin, xi, 0.0)
    num = np.where(fin, a * xs + b, a)
    den = np.where(fin, c * xs + d, c)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den == 0.0, np.inf, out)


def frames_mul(f, g):
    """Matrix product of frame arrays (no canonicalization)."""
    return np.asarray(f) @ np.asarray(g)


def frame_base_arr(frames):
    """Base points π(F) = F·o as complex numbers.

    Assumes unit determinant, which every frame in this library has by
    construction; computing the height as 1/(c²+d²) instead of via the
    generic Möbius formula avoids the catastrophic cancellation in ad - bc
    for frames far from the identity.
    """
    frames = np.asarray(frames, dtype=float)
    a, b = frames[..., 0, 0], frames[..., 0, 1]
    c, d = frames[..., 1, 0], frames[..., 1, 1]
    n = c * c + d * d
    return ((a * c + b * d) + 1j) / n


def frame_endpoints_arr(frames):
    """(xi_minus, xi_plus) = (F·0, F·∞) as float arrays with np.inf."""
    frames = np.asarray(frames, dtype=float)
    a, b = frames[..., 0, 0], frames[..., 0, 1]
    c, d = frames[..., 1, 0], frames[..., 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        xm = np.where(d == 0.0, np.inf, b / np.where(d == 0.0, 1.0, d))
        xp = np.where(c == 0.0, np.inf, a / np.where(c == 0.0, 1.0, c))
    return xm, xp


def frame_hopf_arr(frames):
    """Hopf coordinates (xi_minus, xi_plus, t) of a frame array."""
    xm, xp = frame_endpoints_arr(frames)
    base = frame_base_arr(frames)
    t = busemann_arr(xm, base, np.full(np.shape(base), 1j, dtype=complex))
    return xm, xp, t


def _endpoint_frames_arr(xi, eta):
    """Frames g0 with g0·0 = xi, g0·∞ = eta, det 1 (no t normalization)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    xi, eta = np.broadcast_arrays(xi, eta)
    n = xi.shape
    out = np.empty(n + (2, 2), dtype=float)
    xi_fin = np.isfinite(xi)
    eta_fin = np.isfinite(eta)
    both = xi_fin & eta_fin
    # both finite: [[eta, xi], [1, 1]] or [[eta, -xi], [1, -1]] by orientation
    s = np.where(both & (eta > xi), 1.0, -1.0)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(np.where(both, s * (eta - xi), 1.0))
    out[..., 0, 0] = np.where(both, np.where(eta_fin, eta, 0.0) / root, 0.0)
    out[..., 0, 1] = np.where(both, s * np.where(xi_fin, xi, 0.0) / root, 0.0)
    out[..., 1, 0] = np.where(both, 1.0 / root, 0.0)
    out[..., 1, 1] = np.where(both, s / root, 0.0)
    # eta = ∞: translation z -> z + xi
    m = xi_fin & ~eta_fin
    out[..., 0, 0] = np.where(m, 1.0, out[..., 0, 0])
    out[..., 0, 1] = np.where(m, np.where(xi_fin, xi, 0.0), out[..., 0, 1])
    out[..., 1, 0] = np.where(m, 0.0, out[..., 1, 0])
    out[..., 1, 1] = np.where(m, 1.0, out[..., 1, 1])
    # xi = ∞: z -> eta - 1/z
    m = ~xi_fin & eta_fin
    out[..., 0, 0] = np.where(m, np.where(eta_fin, eta, 0.0), out[..., 0, 0])
    out[..., 0, 1] = np.where(m, -1.0, out[..., 0, 1])
    out[..., 1, 0] = np.where(m, 1.0, out[..., 1, 0])
    out[..., 1, 1] = np.where(m, 0.0, out[..., 1, 1])
    if np.any(~xi_fin & ~eta_fin):
        raise ValueError("Hopf coordinates require distinct endpoints")
    return out


def hopf_frame_arr(xi, eta, t):
    """Frames with Hopf coordinates (xi, eta, t); inverse of frame_hopf_arr."""
    g0 = _endpoint_frames_arr(xi, eta)
    _, _, t0 = frame_hopf_arr(g0)
    u = np.asarray(t, dtype=float) - t0
    e = np.exp(u / 2.0)
    at = np.zeros(np.shape(e) + (2, 2), dtype=float)
    at[..., 0, 0] = e
    at[..., 1, 1] = 1.0 / e
    return frames_mul(g0, at)


def gromov_product_arr(xi, eta):
    """Gromov product (xi|eta)_o of distinct boundary points, from the
    identity 2(xi|eta)_o = β_xi(o,p) + β_eta(o,p) for p on the geodesic."""
    xi = np.asarray(xi, dtype=float)
    p = geodesic_base_arr(xi, eta, np.zeros(xi.shape))
    o = np.full(p.shape, complex(ORIGIN.x, ORIGIN.y))
    return 0.5 * (busemann_arr(xi, o, p) + busemann_arr(eta, o, p))


def geodesic_base_arr(xi, eta, t):
    """Base point of the frame with Hopf coordinates (xi, eta, t)."""
    g0 = _endpoint_frames_arr(xi, eta)
    _, _, t0 = frame_hopf_arr(g0)
    u = np.asarray(t, dtype=float) - t0
    return mobius_point_arr(g0, np.exp(u) * 1j)


def horocycle_frames_arr(frame, s):
    """F·n_s for one frame and an array of parameters s."""
    m = frame.as_array() if isinstance(frame, GroupElement) else np.asarray(frame, float)
    s = np.asarray(s, dtype=float)
    out = np.empty(s.shape + (2, 2), dtype=float)
    out[..., 0, 0] = m[0, 0] + m[0, 1] * s
    out[..., 0, 1] = m[0, 1]
    out[..., 1, 0] = m[1, 0] + m[1, 1] * s
    out[..., 1, 1] = m[1, 1]
    return out


def flow_frames_arr(frames, t):
    """F·a_t applied along an array of frames (scalar or array t)."""
    frames = np.asarray(frames, dtype=float)
    e = np.exp(np.asarray(t, dtype=float) / 2.0)
    out = np.empty(frames.shape, dtype=float)
    out[..., 0, 0] = frames[..., 0, 0] * e
    out[..., 0, 1] = frames[..., 0, 1] / e
    out[..., 1, 0] = frames[..., 1, 0] * e
    out[..., 1, 1] = frames[..., 1, 1] / e
    return out


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance between two half-plane points."""
    d2 = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
    return math.acosh(1.0 + d2 / (2.0 * p.y * q.y))


def mobius_apply(g: GroupElement, z):
    """Fractional-linear action of g on an HPoint or a BoundaryPoint."""
    if isinstance(z, HPoint):
        w = (g.a * z.z + g.b) / (g.c * z.z + g.d)
        # deep in a cusp of rounding: the true height is positive but can be
        # below float cancellation noise; clamp to a positive floor
        return HPoint(w.real, w.imag if w.imag > 0 else 1e-300)
    if isinstance(z, BoundaryPoint):
        if z.is_infinity:
            return BOUNDARY_INFINITY if g.c == 0.0 else BoundaryPoint(g.a / g.c)
        den = g.c * z.value + g.d
        if den == 0.0:
            return BOUNDARY_INFINITY
        return BoundaryPoint((g.a * z.value + g.b) / den)
    raise TypeError(f"cannot apply Mobius map to {type(z).__name__}")


def busemann(xi: BoundaryPoint, p: HPoint, q: HPoint) -> float:
    """Busemann cocycle β_ξ(p, q) = lim_{z→ξ} d(p, z) - d(q, z)."""
    return float(busemann_arr(np.array(xi.value), np.array(p.z), np.array(q.z)))


def frame_to_hopf(F: GroupElement) -> HopfCoord:
    """Hopf coordinates of a frame: (F·0, F·∞, β_{F·0}(π(F), o))."""
    xm, xp, t = frame_hopf_arr(F.as_array())
    return HopfCoord(BoundaryPoint(float(xm)), BoundaryPoint(float(xp)), float(t))


def hopf_to_frame(h: HopfCoord) -> GroupElement:
    """The frame with the given Hopf coordinates (inverse of frame_to_hopf)."""
    m = hopf_frame_arr(
        np.array([h.xi_minus.value]), np.array([h.xi_plus.value]), np.array([h.t])
    )[0]
    return GroupElement.from_array(m)


def isometry_on_hopf(gamma: GroupElement, h: HopfCoord) -> HopfCoord:
    """Action of an isometry in Hopf coordinates.

    Endpoints move by the boundary action; the time coordinate shifts by
    the Busemann cocycle β_{ξ⁻}(o, γ⁻¹o).  Agrees with the matrix-product
    route frame_to_hopf(γ · hopf_to_frame(h)).
    """
    shift = busemann(h.xi_minus, ORIGIN, mobius_apply(gamma.inverse(), ORIGIN))
    return HopfCoord(
        mobius_apply(gamma, h.xi_minus),
        mobius_apply(gamma, h.xi_plus),
        h.t + shift,
    )


def geodesic_flow(F: GroupElement, t: float) -> GroupElement:
    """Geodesic flow: F ↦ F·a_t (translates the Hopf time coordinate by t)."""
    return F.mul(flow_element(t))


def horocycle_step(F: GroupElement, s: float) -> GroupElement:
    """Horocycle flow: F ↦ F·n_s (moves only the forward endpoint)."""
    return F.mul(horocycle_element(s))
