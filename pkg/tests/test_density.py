"""Patterson-Sullivan densities and critical-exponent estimators."""

import math

import numpy as np
import pytest

import horolab.hypgeom as hg
from horolab.density import (
    build_ps_measure,
    coarsen,
    cylinder_index,
    discretize_lebesgue,
    equivariance_deviation,
    estimate_delta,
    lebesgue_density,
    orbit_distances_by_level,
    poincare_partial,
    support_interval,
)
from horolab.errors import InsufficientDepth
from horolab.hypgeom import HPoint, ORIGIN, BoundaryPoint
from horolab.schottky import preset, word_count


@pytest.fixture(scope="module")
def S():
    return preset("default")


# frozen regression anchors for the default group (series-bisection at the
# stated cutoffs; recomputing must reproduce them to near float precision)
POINCARE_HALF_K8 = 1.943445094960703
POINCARE_ONE_K8 = 1.0319228824038345
DELTA_K10 = 0.3913928489166536
SUPPORT_DISK1_K12 = (2.829009976861476, 3.6084827673597206)


def test_poincare_partial_regression(S):
    assert poincare_partial(S, 0.5, 8) == pytest.approx(
        POINCARE_HALF_K8, rel=1e-12)
    assert poincare_partial(S, 1.0, 8) == pytest.approx(
        POINCARE_ONE_K8, rel=1e-12)


def test_poincare_partial_monotone_in_exponent(S):
    vals = [poincare_partial(S, s, 6) for s in (0.2, 0.5, 0.8, 1.1)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_poincare_partial_validation(S):
    with pytest.raises(ValueError):
        poincare_partial(S, -0.1, 6)
    with pytest.raises(ValueError):
        poincare_partial(S, 0.5, -1)


def test_orbit_level_sizes(S):
    levels = orbit_distances_by_level(S, 5)
    assert levels[0].shape == (1,)
    for l in range(1, 6):
        assert levels[l].shape[0] == word_count(S.m, l)
    # deeper words start farther out
    assert levels[5].min() > levels[2].min()


def test_estimate_delta_regression_and_bracket(S):
    est = estimate_delta(S, 10)
    assert est.value == pytest.approx(DELTA_K10, abs=1e-9)
    assert est.lower <= est.value <= est.upper
    assert est.method == "series-bisection"


def test_estimate_delta_orders_presets():
    d_thin = estimate_delta(preset("thin"), 10).value
    d_default = estimate_delta(preset("default"), 10).value
    assert d_thin < d_default


def test_estimate_delta_requires_depth(S):
    with pytest.raises(ValueError):
        estimate_delta(S, 4)


def test_ps_measure_is_probability_on_limit_set(S):
    delta = estimate_delta(S, 10).value
    nu = build_ps_measure(S, ORIGIN, delta, 8)
    assert nu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert nu.atom_count == word_count(S.m, 8)
    xs, w = nu.finite_arrays()
    inside = np.zeros(xs.shape, dtype=bool)
    for _, d in S._disks:
        inside |= np.abs(xs - d.center) < d.radius
    assert inside.all()
    assert (w > 0).all()


def test_ps_measure_refines_toward_conformality(S):
    delta = estimate_delta(S, 10).value
    devs = [equivariance_deviation(S, build_ps_measure(S, ORIGIN, delta, k),
                                   delta, depth=2)
            for k in (6, 8, 10)]
    assert devs[2] < devs[0]
    assert devs[2] < 0.05


def test_lebesgue_density_matches_poisson_kernel():
    # exponent n-1 = 1 density between basepoints is the Poisson kernel
    # ratio; at equal points it is 1, and it satisfies the cocycle rule
    x, y, z = HPoint(0.4, 1.3), HPoint(-0.7, 0.5), HPoint(1.1, 2.0)
    xi = BoundaryPoint(1.7)
    assert lebesgue_density(x, x, xi) == pytest.approx(1.0, abs=1e-12)
    assert lebesgue_density(x, z, xi) == pytest.approx(
        lebesgue_density(x, y, xi) * lebesgue_density(y, z, xi), rel=1e-12)


def test_discretize_lebesgue_covers_line(S):
    lam = discretize_lebesgue(ORIGIN, 720)
    xs, w = lam.finite_arrays()
    assert (w > 0).all()
    assert lam.atom_count == 720
    # full visual measure of the boundary circle
    assert lam.total_mass == pytest.approx(2.0 * math.pi, rel=1e-12)


def test_coarsen_preserves_disk_masses(S):
    delta = estimate_delta(S, 10).value
    nu = build_ps_measure(S, ORIGIN, delta, 8)
    coarse = coarsen(nu, S, per_disk=24)
    assert coarse.total_mass == pytest.approx(nu.total_mass, rel=1e-12)
    assert coarse.atom_count <= 24 * len(S._disks)
    xs, w = nu.finite_arrays()
    cxs, cw = coarse.finite_arrays()
    for _, d in S._disks:
        m_full = w[np.abs(xs - d.center) < d.radius].sum()
        m_coarse = cw[np.abs(cxs - d.center) < d.radius].sum()
        assert m_coarse == pytest.approx(m_full, rel=1e-9)


def test_cylinder_index_consistent_with_coding(S):
    from horolab.schottky import code_boundary, limit_point
    words = [(1, 2, -1), (2, 2, 1), (-1, -2, 2)]
    xs = np.array([limit_point(S, w).value for w in words])
    idx, ok = cylinder_index(S, xs, depth=3)
    assert ok.all()
    # same leading 3 letters -> same cylinder; different -> different
    assert len(set(idx.tolist())) == 3
    idx2, ok2 = cylinder_index(S, np.array([0.0]), depth=2)
    assert not ok2[0]


def test_support_interval_regression(S):
    delta = estimate_delta(S, 12).value
    nu = build_ps_measure(S, ORIGIN, delta, 12)
    lo, hi = support_interval(S, nu, 1)
    assert lo == pytest.approx(SUPPORT_DISK1_K12[0], abs=1e-9)
    assert hi == pytest.approx(SUPPORT_DISK1_K12[1], abs=1e-9)
    d = S._disks[1][1]
    assert d.center - d.radius < lo < hi < d.center + d.radius


def test_support_interval_requires_atoms(S):
    lam = discretize_lebesgue(ORIGIN, 32)
    delta = estimate_delta(S, 10).value
    nu = build_ps_measure(S, ORIGIN, delta, 6)
    # a measure with no atoms in a disk: restrict nu to disk 0 atoms only
    from horolab.density import AtomicBoundaryMeasure
    xs, w = nu.finite_arrays()
    d0 = S._disks[0][1]
    keep = np.abs(xs - d0.center) < d0.radius
    small = AtomicBoundaryMeasure(positions=xs[keep], weights=w[keep],
                                  basepoint=ORIGIN, exponent=delta)
    with pytest.raises(InsufficientDepth):
        support_interval(S, small, 1)
