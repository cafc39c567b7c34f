"""Schottky group construction, coding, and domain reduction."""

import math

import numpy as np
import pytest

import horolab.hypgeom as hg

from horolab.schottky import (
    PRESET_NAMES,
    SchottkyData,
    attracting_fixed_point,
    code_boundary,
    enumerate_words,
    level_matrices,
    limit_point,
    paired_disk_generator,
    preset,
    reduce_frames_arr,
    reduce_to_domain,
    word_count,
)


@pytest.fixture(scope="module")
def S():
    return preset("default")


def test_presets_construct_and_have_two_generators():
    for name in PRESET_NAMES:
        G = preset(name)
        assert G.m == 2
        assert len(G._disks) == 4


def test_unknown_preset_rejected():
    with pytest.raises((KeyError, ValueError)):
        preset("nope")


def test_overlapping_disks_rejected():
    g1 = paired_disk_generator(-1.0, 1.0, 1.0, 1.0)
    g2 = paired_disk_generator(-1.5, 1.0, 4.0, 1.0)
    with pytest.raises(ValueError):
        SchottkyData([g1, g2])


def test_generator_maps_disk_exteriors(S):
    # each generator maps boundary points outside its minus disk into
    # its plus disk, and the minus-disk edge onto the plus-disk edge
    rng = np.random.default_rng(0)
    for i in range(1, S.m + 1):
        g = S.generator_matrix(i)
        minus, plus = S.disk(-i), S.disk(i)
        outside = [z for z in rng.uniform(-20, 20, 200)
                   if abs(z - minus.center) > minus.radius]
        for z in outside:
            img = hg.mobius_apply(g, hg.BoundaryPoint(float(z)))
            assert abs(img.value - plus.center) <= plus.radius + 1e-9
        for z in (minus.center - minus.radius, minus.center + minus.radius):
            img = hg.mobius_apply(g, hg.BoundaryPoint(float(z)))
            assert abs(img.value - plus.center) == pytest.approx(
                plus.radius, abs=1e-9)


def test_word_count_formula(S):
    for length in (1, 2, 3, 4):
        words = [w for w, _ in enumerate_words(S, length) if len(w) == length]
        assert len(words) == word_count(S.m, length)
        assert word_count(S.m, length) == 2 * S.m * (2 * S.m - 1) ** (length - 1)


def test_enumerate_words_are_reduced_and_carry_matrices(S):
    for w, g in enumerate_words(S, 3):
        for a, b in zip(w, w[1:]):
            assert a != -b
        assert g.proj_distance(S.word_matrix(w)) < 1e-9


def test_level_matrices_counts(S):
    for level, mats, words in level_matrices(S, 4):
        if level == 0:
            assert mats.shape[0] == 1
        else:
            assert mats.shape[0] == word_count(S.m, level)


def test_limit_point_lies_in_leading_disk(S):
    for word in ((1, 2, 1), (-2, 1, 1), (2, -1, 2)):
        xi = limit_point(S, word)
        d = S.disk(word[0])
        assert abs(xi.value - d.center) < d.radius


def test_code_boundary_recovers_word_prefix(S):
    word = (1, -2, 1, 2, -1, 1)
    xi = limit_point(S, word)
    assert tuple(code_boundary(S, xi, 4)) == word[:4]


def test_code_boundary_returns_none_off_the_limit_set(S):
    assert code_boundary(S, hg.BoundaryPoint(0.0), 2) is None
    assert code_boundary(S, hg.BOUNDARY_INFINITY, 2) is None


def test_attracting_fixed_point_is_fixed(S):
    for i in (1, 2, -1, -2):
        g = S.generator_matrix(i)
        p = attracting_fixed_point(g)
        img = hg.mobius_apply(g, p)
        assert img.value == pytest.approx(p.value, abs=1e-9)
        d = S.disk(i)
        assert abs(p.value - d.center) < d.radius
    # explicit anchor: [[3, 8], [1, 3]] attracts to 2*sqrt(2)
    g1 = S.generators[0].matrix
    assert attracting_fixed_point(g1).value == pytest.approx(
        2 * math.sqrt(2), abs=1e-12)


def test_reduce_to_domain_returns_domain_frame(S):
    gamma = S.word_matrix((1, 2, -1))
    F = gamma.mul(hg.GroupElement(1.0, 0.2, 0.0, 1.0))
    red, word = reduce_to_domain(S, F)
    base = hg.frame_base_arr(red.as_array()[None])[0]
    assert S.in_domain_arr(np.array([base]))[0]
    # the reducing word undoes gamma up to a domain frame
    assert S.word_matrix(word).mul(red).proj_distance(F) < 1e-9


def test_reduce_frames_arr_matches_scalar_reduction(S):
    rng = np.random.default_rng(0)
    frames = []
    for _ in range(50):
        gamma = S.word_matrix(tuple(
            w for w in [(1,), (2, 1), (-2, 1, 2)][rng.integers(0, 3)]))
        F = gamma.mul(hg.GroupElement(1.0, float(rng.uniform(-0.3, 0.3)),
                                      0.0, 1.0))
        frames.append(F.as_array())
    frames = np.array(frames)
    red_arr, _, steps = reduce_frames_arr(S, frames)
    for i in range(frames.shape[0]):
        red, _ = reduce_to_domain(S, hg.GroupElement.from_array(frames[i]))
        got = hg.GroupElement.from_array(red_arr[i])
        assert got.proj_distance(red) < 1e-9
    base = hg.frame_base_arr(red_arr)
    assert S.in_domain_arr(base).all()


def test_reduction_is_idempotent(S):
    rng = np.random.default_rng(1)
    z = rng.uniform(-0.5, 0.5, 20) + 1j * rng.uniform(0.8, 1.2, 20)
    frames = np.zeros((20, 2, 2))
    frames[:, 0, 0] = np.sqrt(z.imag)
    frames[:, 0, 1] = z.real / np.sqrt(z.imag)
    frames[:, 1, 1] = 1.0 / np.sqrt(z.imag)
    red, _, steps = reduce_frames_arr(S, frames)
    assert np.all(steps == 0) or np.allclose(red, frames)


def test_json_round_trip(S):
    doc = S.to_json()
    S2 = SchottkyData.from_json(doc)
    assert S2.m == S.m
    for a, b in zip(S.generators, S2.generators):
        assert a.matrix.proj_distance(b.matrix) < 1e-12
    assert S2.to_json() == doc


def test_containing_disk_and_domain(S):
    for i in (1, -1, 2, -2):
        d = S.disk(i)
        assert S.containing_disk(d.center) is not None
    assert S.containing_disk(0.0) is None
    assert S.in_domain_arr(np.array([complex(0.0, 1.0)]))[0]
