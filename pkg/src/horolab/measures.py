"""Invariant measures as quadratures.

The Bowen-Margulis and Burger-Roblin measures are realized through their
product structure in Hopf coordinates: atoms are (xi_minus, xi_plus, t)
triples built from pairs of boundary atoms and a t-grid, weighted with the
appropriate conformal densities.  Only atoms whose frame already lies in
the chosen fundamental domain are kept, so the quadrature approximates the
quotient measure on a single sheet.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .density import AtomicBoundaryMeasure
from .errors import EmptySupport, LeakyBox
from .hypgeom import (
    ORIGIN,
    GroupElement,
    busemann_arr,
    frame_base_arr,
    geodesic_base_arr,
    hopf_frame_arr,
    horocycle_frames_arr,
    mobius_boundary_arr,
)
from .schottky import SchottkyData

_O = complex(ORIGIN.x, ORIGIN.y)


@dataclass
class QuadratureMeasure:
    """Atomic approximation of an invariant measure in Hopf coordinates."""

    xi_minus: np.ndarray
    xi_plus: np.ndarray
    t: np.ndarray
    weights: np.ndarray
    kind: str
    t_window: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.weights.size
        for arr in (self.xi_minus, self.xi_plus, self.t):
            if arr.size != n:
                raise ValueError("coordinate arrays must share a length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if not 0 < self.weights.sum() < np.inf:
            raise ValueError("total mass must be positive and finite")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def atom_count(self) -> int:
        return int(self.weights.size)

    def frames(self) -> np.ndarray:
        """(n, 2, 2) frame of every atom."""
        return hopf_frame_arr(self.xi_minus, self.xi_plus, self.t)

    def integrate(self, values: np.ndarray) -> float:
        """Sum of weights times per-atom values."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("xi_minus,xi_plus,t,weight,kind\n")
            for xm, xp, t, w in zip(self.xi_minus, self.xi_plus, self.t, self.weights):
                fh.write(
                    f"{xm:.17g},{xp:.17g},{t:.17g},{w:.17g},{self.kind}\n"
                )


@dataclass
class HorocycleConditional:
    """Conditional measure of the Bowen-Margulis measure on one N-orbit."""

    frame: GroupElement
    s: np.ndarray
    weights: np.ndarray
    radius: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.abs(self.s) > self.radius * (1 + 1e-12)):
            raise ValueError("atoms must satisfy |s| <= radius")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def mass_within(self, r: float) -> float:
        """Mass of the sub-ball {|s| <= r}."""
        return float(self.weights[np.abs(self.s) <= r].sum())


@dataclass
class FlowBox:
    """Product neighborhood in Hopf coordinates.

    Plaques (local N-leaves) are xi_plus segments over a grid of
    (xi_minus, t) cells; the transversal is the set of cell centers.
    Coordinate alignment makes holonomy (sliding along leaves) act only on
    xi_plus, so transverse binning is unaffected by it.
    """

    xi_minus_range: tuple
    xi_plus_range: tuple
    t_range: tuple
    n_xi: int
    n_t: int
    r0: float

    def __post_init__(self):
        for lo, hi in (self.xi_minus_range, self.xi_plus_range, self.t_range):
            if not lo < hi:
                raise ValueError("box intervals must be nondegenerate")
        if self.n_xi < 1 or self.n_t < 1 or self.r0 <= 0:
            raise ValueError("need n_xi, n_t >= 1 and r0 > 0")

    @property
    def n_plaques(self) -> int:
        return self.n_xi * self.n_t

    def cell_centers(self):
        lo, hi = self.xi_minus_range
        xm = lo + (np.arange(self.n_xi) + 0.5) * (hi - lo) / self.n_xi
        lo, hi = self.t_range
        tt = lo + (np.arange(self.n_t) + 0.5) * (hi - lo) / self.n_t
        return xm, tt

    def transversal(self, xi_plus_offset: float = 0.0) -> np.ndarray:
        """Frames at the plaque centers; offset slides them along leaves."""
        xm, tt = self.cell_centers()
        xp = 0.5 * (self.xi_plus_range[0] + self.xi_plus_range[1]) + xi_plus_offset
        XM, TT = np.meshgrid(xm, tt, indexing="ij")
        return hopf_frame_arr(XM.ravel(), np.full(XM.size, xp), TT.ravel())

    def contains(self, xi_minus, xi_plus, t) -> np.ndarray:
        inside = (
            (xi_minus > self.xi_minus_range[0]) & (xi_minus < self.xi_minus_range[1])
            & (xi_plus > self.xi_plus_range[0]) & (xi_plus < self.xi_plus_range[1])
            & (t > self.t_range[0]) & (t < self.t_range[1])
        )
        return inside

    def cell_index(self, xi_minus, t) -> np.ndarray:
        """Flat plaque index of in-box coordinates."""
        lo, hi = self.xi_minus_range
        i = np.floor((xi_minus - lo) / (hi - lo) * self.n_xi).astype(int)
        lo, hi = self.t_range
        j = np.floor((t - lo) / (hi - lo) * self.n_t).astype(int)
        i = np.clip(i, 0, self.n_xi - 1)
        j = np.clip(j, 0, self.n_t - 1)
        return i * self.n_t + j


# ---------------------------------------------------------------------------
# quadratures
# ---------------------------------------------------------------------------

def _pair_quadrature(S, minus_measure, plus_measure, exp_minus, exp_plus,
                     t_window, t_step, kind, provenance):
    xm, wm = minus_measure.finite_arrays()
    xp, wp = plus_measure.finite_arrays()
    t_lo, t_hi = t_window
    nt = max(1, int(round((t_hi - t_lo) / t_step)))
    t_grid = t_lo + (np.arange(nt) + 0.5) * (t_hi - t_lo) / nt
    dt = (t_hi - t_lo) / nt

    XM, XP = np.meshgrid(xm, xp, indexing="ij")
    WW = np.outer(wm, wp)
    distinct = np.abs(XM - XP) > 1e-12
    XM, XP, WW = XM[distinct], XP[distinct], WW[distinct]

    out_xm, out_xp, out_t, out_w = [], [], [], []
    for t in t_grid:
        tt = np.full(XM.shape, t)
        p = geodesic_base_arr(XM, XP, tt)
        keep = S.in_domain_arr(p)
        if not np.any(keep):
            continue
        pm, pp, pw, pb = XM[keep], XP[keep], WW[keep], p[keep]
        o = np.full(pb.shape, _O)
        dens = np.exp(
            exp_minus * busemann_arr(pm, o, pb)
            + exp_plus * busemann_arr(pp, o, pb)
        )
        out_xm.append(pm)
        out_xp.append(pp)
        out_t.append(np.full(pm.shape, t))
        out_w.append(pw * dens * dt)
    if not out_w:
        raise EmptySupport("no quadrature atom lands in the fundamental domain")
    return QuadratureMeasure(
        xi_minus=np.concatenate(out_xm),
        xi_plus=np.concatenate(out_xp),
        t=np.concatenate(out_t),
        weights=np.concatenate(out_w),
        kind=kind,
        t_window=(t_lo, t_hi),
        provenance=provenance,
    )


def bm_quadrature(S: SchottkyData, nu_o: AtomicBoundaryMeasure, delta: float,
                  t_window=(-4.0, 4.0), t_step=0.25) -> QuadratureMeasure:
    """Bowen-Margulis quadrature on one fundamental domain.

    Weight of atom (xi, eta, t) is the product of the boundary-atom weights
    times t_step times exp(+delta*(beta_xi(o,p) + beta_eta(o,p))) with p the
    base point; the plus sign is what makes the result invariant under the
    group and the geodesic flow.  Atoms whose base point falls outside the
    fundamental domain are rejected rather than reduced, so each quotient
    point is counted on exactly one sheet.
    """
    prov = {
        "sign": "+",
        "nu_cutoff": nu_o.provenance.get("cutoff"),
        "nu_atoms": nu_o.atom_count,
        "t_step": t_step,
        "delta": delta,
    }
    return _pair_quadrature(S, nu_o, nu_o, delta, delta, t_window, t_step,
                            "BM", prov)


def br_quadrature(S: SchottkyData, nu_o: AtomicBoundaryMeasure,
                  lam_o: AtomicBoundaryMeasure, delta: float,
                  t_window=(-4.0, 4.0), t_step=0.25) -> QuadratureMeasure:
    """Burger-Roblin quadrature: conformal density of exponent delta on the
    backward endpoint, Lebesgue (exponent n-1 = 1) on the forward one."""
    prov = {
        "sign": "+",
        "nu_cutoff": nu_o.provenance.get("cutoff"),
        "nu_atoms": nu_o.atom_count,
        "lebesgue_resolution": lam_o.provenance.get("resolution"),
        "t_step": t_step,
        "delta": delta,
    }
    return _pair_quadrature(S, nu_o, lam_o, delta, 1.0, t_window, t_step,
                            "BR", prov)


# ---------------------------------------------------------------------------
# conditionals on N-orbits
# ---------------------------------------------------------------------------

def bm_conditional(F: GroupElement, nu_o: AtomicBoundaryMeasure, delta: float,
                   radius: float, resolution: int = 256) -> HorocycleConditional:
    """Conditional measure on the N-orbit piece {F n_s : |s| <= radius}.

    The forward endpoint of F n_s is a Moebius function of s, so each atom
    eta of the boundary measure pulls back to a unique parameter s(eta);
    atoms landing in [-radius, radius] are binned to an s-grid with weight
    exp(delta * beta_eta(o, base of F n_{s(eta)})) times the atom mass.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    m = F.as_array()
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    eta, w = nu_o.finite_arrays()
    # invert eta = (a + b s)/(c + d s)
    den = eta * d - b
    ok = den != 0.0
    s_atom = np.where(ok, (a - eta * c) / np.where(ok, den, 1.0), np.inf)
    if np.any(np.isinf(nu_o.positions)) and d != 0.0:
        # the atom at infinity sits where the denominator c + d s vanishes
        w_inf = nu_o.weights[np.isinf(nu_o.positions)]
        s_atom = np.append(s_atom, -c / d)
        eta = np.append(eta, np.inf)
        w = np.append(w, w_inf.sum())
    keep = np.abs(s_atom) <= radius
    if not np.any(keep):
        raise EmptySupport(
            "no boundary atom pulls back into this horocycle window"
        )
    s_atom, eta, w = s_atom[keep], eta[keep], w[keep]
    p = frame_base_arr(horocycle_frames_arr(F, s_atom))
    dens = np.exp(delta * busemann_arr(eta, np.full(p.shape, _O), p))
    masses = w * dens

    nbin = max(1, int(resolution))
    idx = np.clip(((s_atom + radius) / (2 * radius) * nbin).astype(int), 0, nbin - 1)
    binned = np.bincount(idx, weights=masses, minlength=nbin)
    centers = -radius + (np.arange(nbin) + 0.5) * (2 * radius / nbin)
    nz = binned > 0
    return HorocycleConditional(
        frame=F,
        s=centers[nz],
        weights=binned[nz],
        radius=radius,
        provenance={"delta": delta, "resolution": nbin,
                    "source_atoms": int(keep.sum())},
    )


# ---------------------------------------------------------------------------
# transverse decomposition
# ---------------------------------------------------------------------------

def transverse_decompose(box: FlowBox, Q: QuadratureMeasure):
    """Per-plaque masses of Q restricted to the box.

    Returns a list of (plaque index, mass) for nonempty plaques.  Raises
    LeakyBox when more than 1% of the in-box mass cannot be assigned to a
    plaque (cannot happen for a full coordinate-aligned grid, but the check
    guards future membership rules).
    """
    inside = box.contains(Q.xi_minus, Q.xi_plus, Q.t)
    if not np.any(inside):
        return []
    xm, t, w = Q.xi_minus[inside], Q.t[inside], Q.weights[inside]
    idx = box.cell_index(xm, t)
    assigned = (idx >= 0) & (idx < box.n_plaques)
    lost = float(w[~assigned].sum())
    total = float(w.sum())
    if lost > 0.01 * total:
        raise LeakyBox(f"{lost / total:.1%} of box mass unassigned to plaques")
    masses = np.bincount(idx[assigned], weights=w[assigned],
                         minlength=box.n_plaques)
    return [(int(i), float(m)) for i, m in enumerate(masses) if m > 0]


def plaque_conditional_masses(box: FlowBox, measure: AtomicBoundaryMeasure,
                              exponent: float) -> np.ndarray:
    """Conditional (leafwise) mass of every plaque of the box.

    The plaque through a cell center is the N-segment whose forward
    endpoints sweep the box's xi_plus interval; its conditional measure has
    density exp(exponent * beta_eta(o, base of F n_s)) against the boundary
    measure, with exponent = delta for Bowen-Margulis conditionals and 1
    for the Lebesgue (dn) conditionals of Burger-Roblin.  Dividing raw
    plaque masses by these yields the transverse measure, which BM and BR
    share up to one global constant.
    """
    eta_lo, eta_hi = box.xi_plus_range
    eta, w = measure.finite_arrays()
    in_range = (eta > eta_lo) & (eta < eta_hi)
    eta, w = eta[in_range], w[in_range]
    xm_c, t_c = box.cell_centers()
    out = np.zeros(box.n_plaques)
    if eta.size == 0:
        return out
    frames = box.transversal()
    for idx in range(box.n_plaques):
        m = frames[idx]
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        den = eta * d - b
        ok = den != 0.0
        s = np.where(ok, (a - eta * c) / np.where(ok, den, 1.0), np.inf)
        p = frame_base_arr(horocycle_frames_arr(m, s))
        dens = np.exp(exponent * busemann_arr(eta, np.full(p.shape, _O), p))
        out[idx] = float(np.dot(w[ok], dens[ok]))
    return out


def boundary_shell_fraction(box: FlowBox, Q: QuadratureMeasure,
                            eps: float) -> float:
    """Fraction of box mass within eps of the box boundary (all coordinates)."""
    inside = box.contains(Q.xi_minus, Q.xi_plus, Q.t)
    if not np.any(inside):
        return 0.0
    xm, xp, t, w = (Q.xi_minus[inside], Q.xi_plus[inside], Q.t[inside],
                    Q.weights[inside])
    near = np.zeros(w.shape, dtype=bool)
    for arr, (lo, hi) in ((xm, box.xi_minus_range), (xp, box.xi_plus_range),
                          (t, box.t_range)):
        near |= (arr - lo < eps) | (hi - arr < eps)
    return float(w[near].sum() / w.sum())
