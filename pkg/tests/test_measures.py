"""Quadrature measures, horocycle conditionals, and flow boxes."""

import math

import numpy as np
import pytest

import horolab.hypgeom as hg
from horolab.density import build_ps_measure, discretize_lebesgue, estimate_delta
from horolab.errors import EmptySupport
from horolab.hypgeom import GroupElement, ORIGIN, gromov_product_arr
from horolab.measures import (
    FlowBox,
    HorocycleConditional,
    QuadratureMeasure,
    bm_conditional,
    bm_quadrature,
    boundary_shell_fraction,
    br_quadrature,
    plaque_conditional_masses,
    transverse_decompose,
)
from horolab.schottky import preset


@pytest.fixture(scope="module")
def ctx():
    S = preset("default")
    delta = estimate_delta(S, 10).value
    nu = build_ps_measure(S, ORIGIN, delta, 10)
    return S, delta, nu


@pytest.fixture(scope="module")
def qbm(ctx):
    S, delta, nu = ctx
    from horolab.density import coarsen
    return bm_quadrature(S, coarsen(nu, S, 40), delta, t_step=0.25)


def test_bm_quadrature_invariants(qbm):
    assert qbm.kind == "BM"
    assert qbm.total_mass > 0
    assert qbm.atom_count == qbm.weights.size
    assert np.all(qbm.weights > 0)
    assert np.all(np.abs(qbm.xi_minus - qbm.xi_plus) > 1e-12)


def test_bm_quadrature_bases_in_domain(ctx, qbm):
    S, _, _ = ctx
    bases = hg.geodesic_base_arr(qbm.xi_minus, qbm.xi_plus, qbm.t)
    assert S.in_domain_arr(bases).all()


def test_bm_quadrature_flip_symmetry(ctx, qbm):
    """Time reversal swaps the endpoints and sends the Hopf time t to
    -t - 2(xi|eta)_o; the Bowen-Margulis weights are invariant under it."""
    S, delta, nu = ctx
    gp = gromov_product_arr(qbm.xi_minus, qbm.xi_plus)
    flipped_t = -qbm.t - 2.0 * gp
    bases = hg.geodesic_base_arr(qbm.xi_plus, qbm.xi_minus, flipped_t)
    o = np.full(bases.shape, complex(0.0, 1.0))
    dens = np.exp(delta * (hg.busemann_arr(qbm.xi_plus, o, bases)
                           + hg.busemann_arr(qbm.xi_minus, o, bases)))
    direct = np.exp(delta * (hg.busemann_arr(qbm.xi_minus, o,
                                             hg.geodesic_base_arr(
                                                 qbm.xi_minus, qbm.xi_plus,
                                                 qbm.t))
                             + hg.busemann_arr(qbm.xi_plus, o,
                                               hg.geodesic_base_arr(
                                                   qbm.xi_minus, qbm.xi_plus,
                                                   qbm.t))))
    assert np.max(np.abs(dens / direct - 1.0)) < 1e-9


def test_br_quadrature_kind_and_mass(ctx):
    S, delta, nu = ctx
    from horolab.density import coarsen
    lam = discretize_lebesgue(ORIGIN, 180)
    q = br_quadrature(S, coarsen(nu, S, 40), lam, delta, t_step=0.25)
    assert q.kind == "BR"
    assert q.total_mass > 0


def test_quadrature_empty_window_raises(ctx):
    S, delta, nu = ctx
    from horolab.density import coarsen
    with pytest.raises(EmptySupport):
        bm_quadrature(S, coarsen(nu, S, 40), delta, t_window=(80.0, 81.0),
                      t_step=0.5)


def test_quadrature_validation():
    with pytest.raises(ValueError):
        QuadratureMeasure(
            xi_minus=np.array([0.0]), xi_plus=np.array([1.0]),
            t=np.array([0.0]), weights=np.array([-1.0]),
            kind="BM", t_window=(-1, 1))


def test_bm_conditional_atoms_and_mass(ctx):
    S, delta, nu = ctx
    import horolab.dynamics as dy
    rng = np.random.default_rng(0)
    F = dy.omega_frame(S, rng)
    mu = bm_conditional(F, nu, delta, radius=5.0)
    assert mu.total_mass > 0
    assert np.all(np.abs(mu.s) <= 5.0 * (1 + 1e-12))
    assert mu.mass_within(5.0) == pytest.approx(mu.total_mass, rel=1e-12)
    assert mu.mass_within(0.5) <= mu.total_mass


def test_bm_conditional_scaling_homothety(ctx):
    """Flowing the frame by u scales the conditional ball mass by exactly
    exp(delta*u) when the radius is scaled by exp(u)."""
    S, delta, nu = ctx
    import horolab.dynamics as dy
    rng = np.random.default_rng(1)
    F = dy.omega_frame(S, rng)
    base = bm_conditional(F, nu, delta, radius=2.0,
                          resolution=500_000).total_mass
    for u in (0.5, 1.0, 2.0):
        e = math.exp(u / 2.0)
        Fu = GroupElement(F.a * e, F.b / e, F.c * e, F.d / e)
        mass = bm_conditional(Fu, nu, delta, radius=2.0 * math.exp(u),
                              resolution=500_000).total_mass
        assert mass / base == pytest.approx(math.exp(delta * u), rel=1e-9)


def test_bm_conditional_empty_support(ctx):
    S, delta, nu = ctx
    # forward endpoint far outside the limit set, tiny ball: no atom
    F = hg.hopf_to_frame(hg.HopfCoord(hg.BoundaryPoint(100.0),
                                      hg.BoundaryPoint(101.0), 0.0))
    with pytest.raises(EmptySupport):
        bm_conditional(F, nu, delta, radius=1e-6)


def test_horocycle_conditional_validation():
    F = GroupElement(1, 0, 0, 1)
    with pytest.raises(ValueError):
        HorocycleConditional(frame=F, s=np.array([2.0]),
                             weights=np.array([1.0]), radius=1.0)
    with pytest.raises(ValueError):
        HorocycleConditional(frame=F, s=np.array([0.5]),
                             weights=np.array([-1.0]), radius=1.0)


def test_flow_box_geometry():
    box = FlowBox((-1.0, 1.0), (2.0, 4.0), (-0.5, 0.5), n_xi=4, n_t=2,
                  r0=1.0)
    assert box.n_plaques == 8
    xm, tt = box.cell_centers()
    assert len(xm) == 4 and len(tt) == 2
    assert box.contains(np.array([0.0]), np.array([3.0]),
                        np.array([0.0]))[0]
    assert not box.contains(np.array([2.0]), np.array([3.0]),
                            np.array([0.0]))[0]
    idx = box.cell_index(np.array(xm), np.full(4, tt[0]))
    assert sorted(idx.tolist()) == [0, 2, 4, 6]
    with pytest.raises(ValueError):
        FlowBox((1.0, -1.0), (2.0, 4.0), (-0.5, 0.5), 4, 2, 1.0)


def test_transverse_decompose_conserves_mass(ctx, qbm):
    S, _, _ = ctx
    box = FlowBox((2.4, 3.6), (-3.6, -2.4), (-1.0, 1.0), n_xi=4, n_t=2,
                  r0=0.5)
    pieces = transverse_decompose(box, qbm)
    inside = box.contains(qbm.xi_minus, qbm.xi_plus, qbm.t)
    total = float(qbm.weights[inside].sum())
    assert sum(m for _, m in pieces) == pytest.approx(total, rel=1e-12)
    assert all(0 <= i < box.n_plaques for i, _ in pieces)


def test_boundary_shell_fraction_bounds(ctx, qbm):
    box = FlowBox((2.4, 3.6), (-3.6, -2.4), (-1.0, 1.0), n_xi=4, n_t=2,
                  r0=0.5)
    f_small = boundary_shell_fraction(box, qbm, 1e-6)
    f_large = boundary_shell_fraction(box, qbm, 0.5)
    assert 0.0 <= f_small <= f_large <= 1.0


def test_plaque_conditional_masses_positive(ctx):
    S, delta, nu = ctx
    box = FlowBox((2.4, 3.6), (-3.6, -2.4), (-1.0, 1.0), n_xi=2, n_t=2,
                  r0=0.5)
    masses = plaque_conditional_masses(box, nu, delta)
    assert masses.shape == (box.n_plaques,)
    assert np.all(masses > 0)


def test_bm_br_transverse_proportionality(ctx, qbm):
    """After dividing per-plaque masses by the leafwise conditional
    masses, BM and BR induce the same transverse measure."""
    S, delta, nu = ctx
    from horolab.density import coarsen
    lam = discretize_lebesgue(ORIGIN, 360)
    qbr = br_quadrature(S, coarsen(nu, S, 40), lam, delta, t_step=0.25)
    box = FlowBox((2.4, 3.6), (-3.6, -2.4), (-1.0, 1.0), n_xi=2, n_t=2,
                  r0=0.5)
    bm_pl = dict(transverse_decompose(box, qbm))
    br_pl = dict(transverse_decompose(box, qbr))
    from horolab.density import coarsen as _c
    cond_bm = plaque_conditional_masses(box, _c(nu, S, 40), delta)
    cond_br = plaque_conditional_masses(box, lam, 1.0)
    common = sorted(set(bm_pl) & set(br_pl))
    assert len(common) >= 2
    tb = np.array([bm_pl[i] / cond_bm[i] for i in common])
    tr = np.array([br_pl[i] / cond_br[i] for i in common])
    tb /= tb.sum()
    tr /= tr.sum()
    assert np.median(np.abs(tb / tr - 1.0)) < 0.1
