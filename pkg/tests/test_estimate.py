import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascadelab import cascade, estimate
from cascadelab.errors import ConfigError, DegenerateRangeError, ZeroOscillationError
from cascadelab.estimate import TestSet as CantorSet
from cascadelab.estimate import cantor_set, fit_loglog
from cascadelab.weights import DiscreteTable, Fractional, LognormalSigned, SignJoint
from cascadelab.words import parse_word

IDENTITY2 = Fractional(2, 1.0, 1.0, SignJoint(1.0, 0.0, 0.0, 0.0))
IDENTITY3 = Fractional(3, 1.0, 1.0, SignJoint(1.0, 0.0, 0.0, 0.0))
FRAC = Fractional(2, 0.75, 0.75)


# ---------------------------------------------------------------------------
# test sets


def test_middle_thirds_cantor_set():
    ts = cantor_set(3, (0, 2), 8)
    assert len(ts.word_indices()) == 256
    assert ts.dimension == pytest.approx(math.log(2) / math.log(3), abs=1e-12)
    assert ts.word_level == 8


def test_small_cantor_indices_by_hand():
    ts = cantor_set(3, (0, 2), 2)
    assert ts.word_indices().tolist() == [0, 2, 6, 8]
    assert [str(w) for w in ts.words()] == ["00", "02", "20", "22"]


def test_block_cantor_set_on_binary_base():
    # a base-4 Cantor set carried by a base-2 cascade
    ts = cantor_set(2, (0, 3), 3, block=2)
    assert ts.word_level == 6
    assert ts.dimension == pytest.approx(0.5, abs=1e-12)
    idx = ts.word_indices()
    assert len(idx) == 8
    assert idx[0] == 0 and idx[-1] == 4**3 - 1
    # digit blocks of every survivor are 00 or 11
    for w in ts.words():
        pairs = [w.digits[i : i + 2] for i in range(0, 6, 2)]
        assert all(p in ((0, 0), (1, 1)) for p in pairs)


def test_full_alphabet_test_set_is_the_unit_interval():
    ts = cantor_set(2, (0, 1), 3)
    assert ts.dimension == 1.0
    assert ts.word_indices().tolist() == list(range(8))


def test_invalid_test_sets():
    with pytest.raises(ConfigError):
        cantor_set(2, (), 3)
    with pytest.raises(ConfigError):
        cantor_set(2, (0, 2), 3)  # digit out of range for block=1
    with pytest.raises(ConfigError):
        cantor_set(2, (0, 0), 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(1, 2), st.integers(1, 4))
def test_test_set_properties(base, block, gens):
    big = base**block
    keep = tuple(range(0, big, 2))
    ts = CantorSet(base, block, keep, gens)
    idx = ts.word_indices()
    assert len(idx) == len(keep) ** gens
    assert np.all(np.diff(idx) > 0)
    assert 0.0 <= ts.dimension <= 1.0


# ---------------------------------------------------------------------------
# regression helper


def test_fit_loglog_exact_line():
    xs = np.arange(2, 10)
    slope, stderr, r2 = fit_loglog(xs, 1.5 * xs - 3.0)
    assert slope == pytest.approx(1.5, abs=1e-12)
    assert stderr == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_loglog_degenerate():
    with pytest.raises(DegenerateRangeError):
        fit_loglog([3.0], [1.0])
    with pytest.raises(DegenerateRangeError):
        fit_loglog([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])


# ---------------------------------------------------------------------------
# image box counting


def test_identity_image_of_unit_interval_has_dim_one():
    real = cascade.build(IDENTITY2, seed=0, depth=14)
    ts = cantor_set(2, (0, 1), 4)
    est = estimate.image_box_dim(real, ts)
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.r_squared > 0.99


def test_identity_image_of_middle_thirds_cantor_set():
    # the diagonal embedding preserves dimension: log 2 / log 3
    real = cascade.build(IDENTITY3, seed=0, depth=13)
    ts = cantor_set(3, (0, 2), 9)
    est = estimate.image_box_dim(real, ts)
    assert est.value == pytest.approx(math.log(2) / math.log(3), abs=0.05)


def test_image_box_dim_counts_are_monotone_in_scale():
    real = cascade.build(FRAC, seed=3, depth=16)
    est = estimate.image_box_dim(real, cantor_set(2, (0, 1), 4))
    counts = [c for _, c in est.counts_per_scale]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    assert 0.0 <= est.value <= 2.0


def test_image_box_dim_guards():
    real = cascade.build(FRAC, seed=0, depth=8)
    with pytest.raises(ConfigError):
        estimate.image_box_dim(real, cantor_set(3, (0, 2), 2))
    with pytest.raises(ConfigError):
        estimate.image_box_dim(real, cantor_set(2, (0, 1), 7))  # deeper than n-4


# ---------------------------------------------------------------------------
# partition function


def test_identity_partition_function_is_exact():
    real = cascade.build(IDENTITY2, seed=0, depth=12)
    for q in ((1.0, 0.0), (1.0, 1.0), (0.5, 0.5)):
        est = estimate.partition_function(real, q, 2, 10)
        assert est.value == pytest.approx(1.0 - (q[0] + q[1]), abs=1e-10)
        assert est.r_squared == pytest.approx(1.0, abs=1e-12)


def test_zero_q_partition_function_counts_cells():
    real = cascade.build(FRAC, seed=1, depth=10)
    est = estimate.partition_function(real, (0.0, 0.0), 2, 8)
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_partition_function_tracks_one_minus_phi():
    real = cascade.build(FRAC, seed=7, depth=14)
    q = (1.0, 1.0)
    est = estimate.partition_function(real, q, 3, 10)
    assert est.value == pytest.approx(1.0 - FRAC.phi(*q), abs=0.1)


def test_partition_function_negative_q_with_zero_oscillation():
    zero_atom = DiscreteTable(2, (((0.0, 0.5), 0.5), ((1.0, 0.5), 0.5)))
    real = cascade.build(zero_atom, seed=2, depth=10)
    with pytest.raises(ZeroOscillationError):
        estimate.partition_function(real, (-0.5, 0.0), 3, 8)


# ---------------------------------------------------------------------------
# Holder exponents


def test_identity_holder_exponent_is_one():
    real = cascade.build(IDENTITY2, seed=0, depth=12)
    h1, h2 = estimate.holder_exponent(real, parse_word("0110101101", 2), 2, 10)
    assert h1 == pytest.approx(1.0, abs=1e-10)
    assert h2 == pytest.approx(1.0, abs=1e-10)


def test_fractional_holder_exponents_concentrate_at_alpha():
    real = cascade.build(FRAC, seed=5, depth=14)
    idx = np.arange(2**10)
    h1, h2 = estimate.holder_exponents(real, idx, 2, 10)
    assert h1.mean() == pytest.approx(0.75, abs=0.05)
    assert h2.mean() == pytest.approx(0.75, abs=0.05)
    assert h1.std() < 0.2


def test_holder_single_word_matches_vectorized():
    real = cascade.build(FRAC, seed=5, depth=12)
    w = parse_word("0110101101", 2)
    single = estimate.holder_exponent(real, w, 3, 10)
    h1, h2 = estimate.holder_exponents(real, [w.index], 3, 10)
    assert single == (h1[0], h2[0])


def test_holder_window_guards():
    real = cascade.build(FRAC, seed=0, depth=8)
    with pytest.raises(ConfigError):
        estimate.holder_exponents(real, [0], 5, 5)
    with pytest.raises(ConfigError):
        estimate.holder_exponent(real, parse_word("01", 2), 2, 6)


# ---------------------------------------------------------------------------
# level sets and occupation measure


def test_identity_level_set_single_interval_per_level():
    real = cascade.build(IDENTITY2, seed=0, depth=12)
    words, est = estimate.level_set(real, 1, 0.3, 8)
    assert len(words) == 1
    iv = words[0]
    assert float(iv.index) / 2**8 <= 0.3 <= float(iv.index + 1) / 2**8
    assert est.value == pytest.approx(0.0, abs=1e-12)
    assert not est.empty


def test_empty_level_set_convention():
    real = cascade.build(IDENTITY2, seed=0, depth=10)
    words, est = estimate.level_set(real, 1, 2.0, 6)
    assert words == []
    assert est.empty and est.value == 0.0


def test_level_crossing_counts_are_nondecreasing():
    real = cascade.build(FRAC, seed=9, depth=12)
    y = float(real.grid[0][2**11])  # an attained value
    counts = estimate.level_crossing_counts(real, 1, y, 2, 8)
    assert np.all(np.diff(counts) >= 0)
    assert counts[0] >= 1


def test_occupation_histogram_identity_is_uniform():
    real = cascade.build(IDENTITY2, seed=0, depth=10)
    edges, masses = estimate.occupation_histogram(real, 1, 16)
    assert masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(masses, 1.0 / 16.0, atol=1e-12)
    assert edges[0] == pytest.approx(0.0) and len(edges) == 17


def test_occupation_histogram_guards():
    real = cascade.build(IDENTITY2, seed=0, depth=6)
    with pytest.raises(ConfigError):
        estimate.occupation_histogram(real, 1, 4)
    with pytest.raises(ConfigError):
        estimate.occupation_histogram(real, 3, 16)


def test_sample_occupation_levels_land_in_range():
    real = cascade.build(FRAC, seed=4, depth=12)
    edges, masses = estimate.occupation_histogram(real, 1, 32)
    ys = estimate.sample_occupation_levels(edges, masses, np.random.default_rng(0), 200)
    assert np.all(ys >= edges[0]) and np.all(ys <= edges[-1])


def test_fractional_level_set_dimension_smoke():
    model = Fractional(2, 0.7, 0.7)
    real = cascade.build(model, seed=11, depth=14)
    edges, masses = estimate.occupation_histogram(real, 1, 32)
    ys = estimate.sample_occupation_levels(edges, masses, np.random.default_rng(1), 4)
    vals = []
    for y in ys:
        _, est = estimate.level_set(real, 1, float(y), 10, fit_lo=3)
        if not est.empty:
            vals.append(est.value)
    assert vals, "all sampled levels missed the range"
    assert abs(np.mean(vals) - 0.3) < 0.2


# ---------------------------------------------------------------------------
# uniform sweep


def test_uniform_sweep_smoke():
    real = cascade.build(FRAC, seed=2, depth=16)
    rows = estimate.uniform_sweep(real, [cantor_set(2, (0, 1), 4)])
    assert len(rows) == 1
    assert rows[0].prediction == pytest.approx(4.0 / 3.0, abs=1e-12)
    assert abs(rows[0].estimate.value - rows[0].prediction) < 0.25


def test_uniform_sweep_scope_guards():
    with pytest.raises(ConfigError):
        estimate.uniform_sweep(
            cascade.build(Fractional(2, 0.6, 0.8), seed=0, depth=8), []
        )
    ln = LognormalSigned.from_beta(2, 0.8, 0.1)
    with pytest.raises(ConfigError):
        estimate.uniform_sweep(cascade.build(ln, seed=0, depth=8), [])
    with pytest.raises(ConfigError):
        estimate.uniform_sweep(cascade.build(IDENTITY2, seed=0, depth=8), [])
