"""Exactness tests for the half-plane geometry layer."""

import math

import numpy as np
import pytest

import horolab.hypgeom as hg
from horolab.hypgeom import (
    BoundaryPoint,
    GroupElement,
    HPoint,
    INF,
    ORIGIN,
    busemann,
    busemann_arr,
    dist,
    dist_arr,
    frame_hopf_arr,
    frame_to_hopf,
    geodesic_base_arr,
    geodesic_flow,
    gromov_product_arr,
    hopf_frame_arr,
    hopf_to_frame,
    horocycle_step,
    mobius_apply,
    mobius_boundary_arr,
)


def random_points(rng, n):
    return rng.uniform(-3, 3, n) + 1j * rng.uniform(0.2, 4.0, n)


def random_frames(rng, n):
    """Random unit-determinant frames with determinant bounded away from 0."""
    out = np.empty((n, 2, 2))
    got = 0
    while got < n:
        cand = rng.normal(size=(2 * n, 2, 2))
        det = cand[:, 0, 0] * cand[:, 1, 1] - cand[:, 0, 1] * cand[:, 1, 0]
        cand = cand[det > 0.1]
        det = det[det > 0.1]
        cand /= np.sqrt(det)[:, None, None]
        take = min(n - got, cand.shape[0])
        out[got:got + take] = cand[:take]
        got += take
    return out


def test_dist_matches_arccosh_formula():
    rng = np.random.default_rng(0)
    p, q = random_points(rng, 500), random_points(rng, 500)
    expected = np.arccosh(1.0 + np.abs(p - q) ** 2 / (2.0 * p.imag * q.imag))
    assert np.max(np.abs(dist_arr(p, q) - expected)) < 1e-12


def test_dist_scalar_wrapper_and_symmetry():
    p, q = HPoint(0.3, 1.2), HPoint(-1.0, 0.4)
    assert dist(p, q) == pytest.approx(dist(q, p), abs=1e-14)
    assert dist(p, p) == pytest.approx(0.0, abs=1e-12)
    # vertical line: d(i, iy) = log y
    assert dist(HPoint(0, 1), HPoint(0, math.e)) == pytest.approx(1.0, abs=1e-12)


def test_busemann_matches_distance_difference_limit():
    rng = np.random.default_rng(1)
    n = 2000
    p, q = random_points(rng, n), random_points(rng, n)
    xi = rng.uniform(-6, 6, n)
    z = xi + 1j * 1e-7
    numeric = dist_arr(p, z) - dist_arr(q, z)
    exact = busemann_arr(xi, p, q)
    assert np.max(np.abs(numeric - exact)) < 1e-5


def test_busemann_cocycle_identity():
    rng = np.random.default_rng(2)
    n = 10_000
    x, y, z = (random_points(rng, n) for _ in range(3))
    xi = rng.uniform(-6, 6, n)
    lhs = busemann_arr(xi, x, z)
    rhs = busemann_arr(xi, x, y) + busemann_arr(xi, y, z)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_busemann_isometry_equivariance():
    rng = np.random.default_rng(3)
    n = 10_000
    p, q = random_points(rng, n), random_points(rng, n)
    xi = rng.uniform(-6, 6, n)
    for g in (GroupElement(1.2, -0.4, 0.3, 0.9),
              GroupElement(0.0, 1.0, -1.0, 0.0),
              GroupElement(1.0, 0.0, 2.5, 1.0)):
        m = g.as_array()
        gz = lambda w: (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])
        gxi = mobius_boundary_arr(np.broadcast_to(m, (n, 2, 2)), xi)
        finite = np.isfinite(gxi)
        lhs = busemann_arr(gxi[finite], gz(p[finite]), gz(q[finite]))
        rhs = busemann_arr(xi[finite], p[finite], q[finite])
        assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_busemann_along_vertical_geodesic():
    # beta_xi(o, point at signed time t toward xi) = -t on the geodesic
    # from o to 0 (the downward vertical line at x = 0).
    for t in (-1.0, -0.3, 0.5, 2.0):
        p = HPoint(0.0, math.exp(-t))
        assert busemann(BoundaryPoint(0.0), ORIGIN, p) == pytest.approx(
            t, abs=1e-12)


def test_hopf_round_trip_on_random_frames():
    rng = np.random.default_rng(4)
    frames = random_frames(rng, 10_000)
    xm, xp, t = frame_hopf_arr(frames)
    back = hopf_frame_arr(xm, xp, t)
    # projective comparison
    sign = np.sign(np.sum(frames * back, axis=(1, 2)))
    err = np.max(np.abs(back * sign[:, None, None] - frames))
    assert err < 1e-9


def test_hopf_time_is_busemann_time():
    rng = np.random.default_rng(5)
    frames = random_frames(rng, 200)
    xm, xp, t = frame_hopf_arr(frames)
    base = hg.frame_base_arr(frames)
    t_bus = busemann_arr(xm, base, np.full(base.shape, complex(0.0, 1.0)))
    assert np.max(np.abs(t - t_bus)) < 1e-9


def test_geodesic_flow_translates_hopf_time():
    F = GroupElement(2.0, 0.3, 1.0, 0.65)
    h0 = frame_to_hopf(F)
    for t in (-2.0, 0.7, 3.1):
        h = frame_to_hopf(geodesic_flow(F, t))
        assert h.t - h0.t == pytest.approx(t, abs=1e-12)
        assert h.xi_minus.value == pytest.approx(h0.xi_minus.value, abs=1e-12)
        assert h.xi_plus.value == pytest.approx(h0.xi_plus.value, abs=1e-12)


def test_horocycle_fixes_backward_endpoint_and_time():
    F = GroupElement(2.0, 0.3, 1.0, 0.65)
    h0 = frame_to_hopf(F)
    for s in (-5.0, 0.4, 12.0):
        h = frame_to_hopf(horocycle_step(F, s))
        assert h.xi_minus.value == pytest.approx(h0.xi_minus.value, abs=1e-12)
        assert h.t == pytest.approx(h0.t, abs=1e-10)


def test_n_conjugation_identity():
    rng = np.random.default_rng(6)
    for _ in range(100):
        m = random_frames(rng, 1)[0]
        F = GroupElement.from_array(m)
        s = float(rng.uniform(-3, 3))
        t = float(rng.uniform(-2, 2))
        lhs = geodesic_flow(horocycle_step(F, s), t)
        rhs = horocycle_step(geodesic_flow(F, t), s * math.exp(t))
        assert lhs.proj_distance(rhs) < 1e-9


def test_gromov_product_from_busemann():
    rng = np.random.default_rng(7)
    n = 2000
    xi = rng.uniform(-6, -0.5, n)
    eta = rng.uniform(0.5, 6, n)
    gp = gromov_product_arr(xi, eta)
    for t in (0.0, 1.3):
        p = geodesic_base_arr(xi, eta, np.full(n, t))
        o = np.full(n, complex(0.0, 1.0))
        two_gp = busemann_arr(xi, o, p) + busemann_arr(eta, o, p)
        assert np.max(np.abs(2.0 * gp - two_gp)) < 1e-9


def test_group_element_normalization_and_sign():
    g = GroupElement(2.0, 0.0, 0.0, 2.0)
    assert g.a * g.d - g.b * g.c == pytest.approx(1.0, abs=1e-12)
    h = GroupElement(-1.0, 0.0, 0.0, -1.0)
    assert h.a >= 0  # canonical sign
    with pytest.raises(ValueError):
        GroupElement(1.0, 0.0, 0.0, -1.0)  # negative determinant


def test_group_element_inverse_and_mul():
    g = GroupElement(1.2, -0.4, 0.3, 0.9)
    assert g.mul(g.inverse()).proj_distance(GroupElement(1, 0, 0, 1)) < 1e-12


def test_boundary_infinity_semantics():
    assert hg.BOUNDARY_INFINITY.is_infinity
    assert hg.BOUNDARY_INFINITY == BoundaryPoint(math.inf)
    assert hg.BOUNDARY_INFINITY != BoundaryPoint(1e12)
    g = GroupElement(1.0, 0.0, 2.5, 1.0)  # lower-triangular: maps inf to a/c
    img = mobius_apply(g, hg.BOUNDARY_INFINITY)
    assert img.value == pytest.approx(g.a / g.c, abs=1e-12)
