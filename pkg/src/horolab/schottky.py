"""Schottky group machinery: ping-pong disks, words, domain reduction, coding.

A Schottky datum is a list of m >= 2 generators, each pairing two disjoint
half-disks centered on the real axis: g_i maps the exterior of D_i^- onto
the interior of D_i^+.  The common exterior of the 2m disks is the
fundamental domain (its closure meets the point at infinity).

Words are tuples of signed 1-based generator indices: +i stands for g_i,
-i for its inverse.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import AmbiguousBoundary, NonTerminating
from .hypgeom import (
    BoundaryPoint,
    GroupElement,
    HopfCoord,
    frame_base_arr,
    mobius_apply,
)

BOUNDARY_TOL = 1e-9
MAX_REDUCTION_STEPS = 10 ** 6

Word = tuple  # tuple of signed generator indices, reduced


@dataclass(frozen=True)
class Disk:
    """Half-disk |z - center| <= radius in the closed upper half-plane."""

    center: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class Generator:
    matrix: GroupElement
    disk_minus: Disk
    disk_plus: Disk


class SchottkyData:
    """Validated Schottky group data.

    Immutable after construction; construction checks disk disjointness and
    the paired mapping property (sampled on the boundary circles).
    """

    def __init__(self, generators, name: str = "custom"):
        generators = list(generators)
        if len(generators) < 2:
            raise ValueError("need m >= 2 free generators (non-elementary group)")
        self.generators = generators
        self.name = name
        self.m = len(generators)
        self._disks = []  # (signed index, Disk)
        for i, gen in enumerate(generators, start=1):
            self._disks.append((-i, gen.disk_minus))
            self._disks.append((+i, gen.disk_plus))
        self._check_disjoint()
        self._check_mapping()
        # flat arrays for vectorized membership tests
        self._centers = np.array([d.center for _, d in self._disks])
        self._radii = np.array([d.radius for _, d in self._disks])
        self._signed = [sgn for sgn, _ in self._disks]
        # matrix applied when a point lies in the corresponding disk
        self._step_mats = []
        for sgn, _ in self._disks:
            g = generators[abs(sgn) - 1].matrix
            self._step_mats.append((g if sgn < 0 else g.inverse()).as_array())

    def _check_disjoint(self):
        for i in range(len(self._disks)):
            for j in range(i + 1, len(self._disks)):
                di, dj = self._disks[i][1], self._disks[j][1]
                if abs(di.center - dj.center) <= di.radius + dj.radius:
                    raise ValueError("ping-pong disks must be pairwise disjoint")

    def _check_mapping(self, samples: int = 32, tol: float = 1e-9):
        for gen in self.generators:
            g = gen.matrix
            dm, dp = gen.disk_minus, gen.disk_plus
            theta = np.linspace(0.05, math.pi - 0.05, samples)
            z = dm.center + dm.radius * np.exp(1j * theta)
            w = (g.a * z + g.b) / (g.c * z + g.d)
            err = np.abs(np.abs(w - dp.center) - dp.radius)
            if err.max() > tol:
                raise ValueError(
                    f"generator does not map boundary of D- onto boundary of D+ "
                    f"(max error {err.max():.2e})"
                )

    # -- elements ----------------------------------------------------------

    def generator_matrix(self, letter: int) -> GroupElement:
        g = self.generators[abs(letter) - 1].matrix
        return g if letter > 0 else g.inverse()

    def word_matrix(self, word) -> GroupElement:
        # raw products (no per-step renormalization): exact for
        # integer-entry generators, and avoids noise amplification
        out = np.eye(2)
        for letter in word:
            out = out @ self.generator_matrix(letter).as_array()
        return GroupElement.from_array(out)

    def disk(self, letter: int) -> Disk:
        gen = self.generators[abs(letter) - 1]
        return gen.disk_plus if letter > 0 else gen.disk_minus

    # -- membership --------------------------------------------------------

    def containing_disk(self, x: float, y: float = 0.0) -> Optional[int]:
        """Signed disk index containing the point, None if exterior to all.

        Raises AmbiguousBoundary within BOUNDARY_TOL of any disk circle.
        """
        for sgn, d in self._disks:
            r = math.hypot(x - d.center, y)
            if abs(r - d.radius) < BOUNDARY_TOL:
                raise AmbiguousBoundary(
                    f"point ({x}, {y}) within {BOUNDARY_TOL} of disk {sgn} boundary"
                )
            if r < d.radius:
                return sgn
        return None

    def in_domain_arr(self, z) -> np.ndarray:
        """Strict-exterior mask for an array of complex points."""
        z = np.asarray(z, dtype=complex)
        inside = np.zeros(z.shape, dtype=bool)
        for c, r in zip(self._centers, self._radii):
            inside |= (z.real - c) ** 2 + z.imag ** 2 < r * r
        return ~inside

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "generators": [
                {
                    "matrix": [g.matrix.a, g.matrix.b, g.matrix.c, g.matrix.d],
                    "disk_minus": {"center": g.disk_minus.center, "radius": g.disk_minus.radius},
                    "disk_plus": {"center": g.disk_plus.center, "radius": g.disk_plus.radius},
                }
                for g in self.generators
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SchottkyData":
        gens = []
        for g in doc["generators"]:
            a, b, c, d = g["matrix"]
            gens.append(
                Generator(
                    GroupElement(a, b, c, d),
                    Disk(g["disk_minus"]["center"], g["disk_minus"]["radius"]),
                    Disk(g["disk_plus"]["center"], g["disk_plus"]["radius"]),
                )
            )
        return cls(gens, name=doc.get("name", "custom"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SchottkyData":
        return cls.from_dict(json.loads(text))


def paired_disk_generator(c_minus, r_minus, c_plus, r_plus) -> Generator:
    """The Mobius map z ↦ c+ - r- r+ / (z - c-), pairing the two disks."""
    s = math.sqrt(r_minus * r_plus)
    mat = GroupElement(c_plus / s, (-c_plus * c_minus - r_minus * r_plus) / s,
                       1.0 / s, -c_minus / s)
    return Generator(mat, Disk(c_minus, r_minus), Disk(c_plus, r_plus))


def preset(name: str) -> SchottkyData:
    """Named test groups: 'default' (c=3, r=1 symmetric), 'thin', 'asym'."""
    if name == "default":
        gens = [
            paired_disk_generator(-3.0, 1.0, 3.0, 1.0),
            paired_disk_generator(-5.25, 1.0, 5.25, 1.0),
        ]
    elif name == "thin":
        gens = [
            paired_disk_generator(-3.0, 0.5, 3.0, 0.5),
            paired_disk_generator(-5.25, 0.5, 5.25, 0.5),
        ]
    elif name == "asym":
        gens = [
            paired_disk_generator(-3.0, 1.0, 3.0, 0.7),
            paired_disk_generator(-5.25, 0.5, 5.25, 1.2),
        ]
    else:
        raise KeyError(f"unknown preset {name!r}")
    return SchottkyData(gens, name=name)


PRESET_NAMES = ("default", "thin", "asym")


# ---------------------------------------------------------------------------
# word enumeration
# ---------------------------------------------------------------------------

def _letters(m: int):
    out = []
    for i in range(1, m + 1):
        out.extend((i, -i))
    return out


def enumerate_words(S: SchottkyData, k: int) -> Iterator[tuple]:
    """Yield every reduced word of length <= k with its matrix, once each.

    Order is by length, then lexicographic in the letter order
    (1, -1, 2, -2, ...).  Count at exact length l >= 1 is 2m(2m-1)^{l-1}.
    """
    letters = _letters(S.m)
    mats = {l: S.generator_matrix(l) for l in letters}
    yield (), GroupElement(1, 0, 0, 1)
    level = [((l,), mats[l]) for l in letters]
    depth = 1
    while depth <= k and level:
        yield from level
        depth += 1
        if depth > k:
            break
        nxt = []
        for word, g in level:
            last = word[-1]
            for l in letters:
                if l != -last:
                    nxt.append((word + (l,), g.mul(mats[l])))
        level = nxt


def level_matrices(S: SchottkyData, k: int):
    """Vectorized word enumeration by level.

    Yields (level, mats, last) with mats an (n, 2, 2) array in the same
    lexicographic order as enumerate_words and last the trailing letters.
    Level 0 is the identity alone.
    """
    letters = _letters(S.m)
    gen_arrs = {l: S.generator_matrix(l).as_array() for l in letters}
    mats = np.eye(2)[None, :, :]
    last = np.zeros(1, dtype=np.int64)
    yield 0, mats, last
    for level in range(1, k + 1):
        blocks = []
        lasts = []
        if level == 1:
            for l in letters:
                blocks.append(gen_arrs[l][None, :, :])
                lasts.append(np.array([l]))
        else:
            # children of each parent, in parent order x letter order
            n = mats.shape[0]
            child_mats = []
            child_last = []
            child_parent = []
            child_rank = []
            for rank, l in enumerate(letters):
                keep = last != -l
                child_mats.append(mats[keep] @ gen_arrs[l])
                child_last.append(np.full(int(keep.sum()), l))
                child_parent.append(np.nonzero(keep)[0])
                child_rank.append(np.full(int(keep.sum()), rank))
            cm = np.concatenate(child_mats)
            cl = np.concatenate(child_last)
            cp = np.concatenate(child_parent)
            cr = np.concatenate(child_rank)
            order = np.lexsort((cr, cp))
            blocks = [cm[order]]
            lasts = [cl[order]]
        mats = np.concatenate(blocks)
        last = np.concatenate(lasts)
        yield level, mats, last


def word_count(m: int, length: int) -> int:
    """Number of reduced words of exact length in the free group F_m."""
    if length == 0:
        return 1
    return 2 * m * (2 * m - 1) ** (length - 1)


# ---------------------------------------------------------------------------
# reduction to the fundamental domain
# ---------------------------------------------------------------------------

def reduce_to_domain(S: SchottkyData, F: GroupElement):
    """Write F = γ_w · F0 with the base point of F0 in the fundamental domain.

    Deterministic ping-pong: at each step apply the inverse generator of the
    unique disk containing the base point.  Returns (F0, word).
    """
    word = []
    cur = F.as_array()
    for _ in range(MAX_REDUCTION_STEPS):
        z = frame_base_arr(cur)
        sgn = S.containing_disk(float(z.real), abs(float(z.imag)))
        if sgn is None:
            return GroupElement.from_array(cur), tuple(word)
        # g_i^{-1} for D+, g_i for D-; raw product, no renormalization
        cur = S.generator_matrix(-sgn).as_array() @ cur
        word.append(sgn)
    raise NonTerminating("domain reduction exceeded the step budget")


def reduce_frames_arr(S: SchottkyData, frames: np.ndarray, max_steps: int = 2000):
    """Vectorized domain reduction of a frame array.

    Uses strict disk membership (no boundary tolerance): points within
    rounding error of a disk circle are assigned deterministically by the
    strict comparison.  Returns (reduced_frames, word_lengths, first_letters)
    with first_letters 0 where the frame was already in the domain.
    """
    frames = np.array(frames, dtype=float, copy=True)
    flat = frames.reshape(-1, 2, 2)
    nsteps = np.zeros(flat.shape[0], dtype=np.int64)
    first = np.zeros(flat.shape[0], dtype=np.int64)
    active = np.arange(flat.shape[0])
    for step in range(max_steps):
        z = frame_base_arr(flat[active])
        idx = np.full(active.shape[0], -1, dtype=np.int64)
        for j, (c, r) in enumerate(zip(S._centers, S._radii)):
            mask = (z.real - c) ** 2 + z.imag ** 2 < r * r
            idx[mask] = j
        hit = idx >= 0
        if not hit.any():
            break
        for j in range(len(S._disks)):
            sel = active[idx == j]
            if sel.size == 0:
                continue
            flat[sel] = S._step_mats[j] @ flat[sel]
            newly = sel[nsteps[sel] == 0]
            first[newly] = S._signed[j]
            nsteps[sel] += 1
        active = active[hit]
    else:
        raise NonTerminating("vectorized domain reduction exceeded max_steps")
    shape = frames.shape[:-2]
    return flat.reshape(frames.shape), nsteps.reshape(shape), first.reshape(shape)


# ---------------------------------------------------------------------------
# boundary coding
# ---------------------------------------------------------------------------

def code_boundary(S: SchottkyData, xi: BoundaryPoint, depth: int):
    """Length-`depth` itinerary of ξ under the expanding Schottky map.

    Applies g_i^{-1} when ξ lies inside D_i^+ (letter +i) and g_i inside
    D_i^- (letter -i).  Returns None when some iterate exits all disks
    (ξ is not in the limit set at this coding depth).
    """
    if depth < 1:
        raise ValueError("coding depth must be >= 1")
    word = []
    cur = xi
    for _ in range(depth):
        if cur.is_infinity:
            return None
        sgn = S.containing_disk(cur.value)
        if sgn is None:
            return None
        word.append(sgn)
        cur = mobius_apply(S.generator_matrix(-sgn), cur)
    return tuple(word)


def is_radial(S: SchottkyData, h: HopfCoord, depth: int) -> bool:
    """Whether the backward endpoint codes to full depth (desk-scale proxy
    for the radial set of a convex-cocompact group)."""
    return code_boundary(S, h.xi_minus, depth) is not None


def attracting_fixed_point(g: GroupElement) -> BoundaryPoint:
    """Attracting boundary fixed point of a hyperbolic element."""
    tr = g.a + g.d
    if abs(tr) <= 2:
        raise ValueError("element is not hyperbolic")
    if g.c == 0.0:
        # fixes ∞ and b/(d-a); ∞ attracts iff |a| > |d|
        if abs(g.a) > abs(g.d):
            return BoundaryPoint(math.inf)
        return BoundaryPoint(g.b / (g.d - g.a))
    disc = math.sqrt(tr * tr - 4.0)
    roots = [((g.a - g.d) + disc) / (2 * g.c), ((g.a - g.d) - disc) / (2 * g.c)]
    # attracting root has |g'(z)| = 1/(cz+d)^2 < 1
    for z in roots:
        if abs(g.c * z + g.d) > 1.0:
            return BoundaryPoint(z)
    raise ValueError("no attracting fixed point found")


def limit_point(S: SchottkyData, word) -> BoundaryPoint:
    """A limit-set point with the given initial itinerary: the image of the
    attracting fixed point of the last letter under the preceding prefix."""
    if not word:
        raise ValueError("need a nonempty word")
    xi = attracting_fixed_point(S.generator_matrix(word[-1]))
    return mobius_apply(S.word_matrix(word[:-1]), xi)
