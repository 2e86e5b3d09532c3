import math

import numpy as np
import pytest

from siclad.errors import MassUnderflowError
from siclad.pvalue import (
    bonferroni_p,
    gaussian_interval_mass,
    naive_p,
    oc_p,
    selective_p,
)
from siclad.region import IntervalSet

from oracles import bonferroni_reference, mp_mass, mp_selective_p, mp_two_sided_p


# ----------------------------------------------------------------- raw masses

def test_mass_deep_tail_frozen_value():
    assert gaussian_interval_mass(10.0, 11.0, 1.0) == pytest.approx(
        7.6196619582030762e-24, rel=1e-12)


def test_mass_basic_identities():
    assert gaussian_interval_mass(-np.inf, np.inf, 1.0) == pytest.approx(1.0)
    assert gaussian_interval_mass(0.0, np.inf, 2.0) == pytest.approx(0.5)
    assert gaussian_interval_mass(1.0, 1.0, 1.0) == 0.0
    assert gaussian_interval_mass(2.0, 1.0, 1.0) == 0.0
    assert gaussian_interval_mass(-1.0, 1.0, 1.0) == pytest.approx(
        0.6826894921370859, rel=1e-12)


def test_mass_reflection_symmetry():
    rng = np.random.default_rng(5)
    for _ in range(50):
        lo = float(rng.uniform(-8, 8))
        hi = lo + float(rng.uniform(0, 4))
        sd = float(rng.uniform(0.2, 3.0))
        assert gaussian_interval_mass(lo, hi, sd) == pytest.approx(
            gaussian_interval_mass(-hi, -lo, sd), rel=1e-12)


def test_mass_scale_invariance():
    rng = np.random.default_rng(6)
    for _ in range(50):
        lo = float(rng.uniform(-5, 5))
        hi = lo + float(rng.uniform(0, 3))
        sd = float(rng.uniform(0.1, 4.0))
        assert gaussian_interval_mass(lo, hi, sd) == pytest.approx(
            gaussian_interval_mass(lo / sd, hi / sd, 1.0), rel=1e-11)


@pytest.mark.parametrize("lo,hi", [
    (0.5, 1.5), (-3.0, -1.0), (-0.7, 2.2), (6.0, 7.0), (12.0, 12.5),
    (8.0, 8.0 + 1e-6), (-20.0, -19.9), (25.0, 26.0), (0.0, 1e-12),
])
def test_mass_matches_high_precision_reference(lo, hi):
    for sd in (0.5, 1.0, 2.5):
        got = gaussian_interval_mass(lo, hi, sd)
        want = float(mp_mass(lo, hi, sd))
        assert got == pytest.approx(want, rel=1e-10)


def test_mass_random_sweep_against_reference():
    rng = np.random.default_rng(7)
    for _ in range(300):
        lo = float(rng.uniform(-15, 15))
        hi = lo + float(10 ** rng.uniform(-8, 1))
        sd = float(10 ** rng.uniform(-1, 1))
        got = gaussian_interval_mass(lo, hi, sd)
        want = float(mp_mass(lo, hi, sd))
        if want > 0:
            assert got == pytest.approx(want, rel=1e-10)


def test_mass_rejects_bad_scale():
    with pytest.raises(ValueError):
        gaussian_interval_mass(0.0, 1.0, 0.0)


# ------------------------------------------------------------------ selective

def test_selective_p_frozen_example():
    region = IntervalSet([(-3.0, -1.0), (1.0, 3.0)])
    assert selective_p(region, 2.0, 1.0) == pytest.approx(
        0.1360426273735836, rel=1e-12)


def test_selective_p_on_full_line_equals_naive():
    region = IntervalSet([(-np.inf, np.inf)])
    for z in (0.3, 1.7, -2.4, 4.0):
        assert selective_p(region, z, 1.3) == pytest.approx(
            naive_p(z, 1.3), rel=1e-12)


def test_selective_p_extremes():
    region = IntervalSet([(-2.0, 2.0)])
    assert selective_p(region, 0.0, 1.0) == pytest.approx(1.0)
    # z at the region edge leaves only the boundary mass
    assert selective_p(region, 2.0, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_selective_p_accepts_plain_pairs():
    got = selective_p([(-3.0, -1.0), (1.0, 3.0)], 2.0, 1.0)
    assert got == pytest.approx(0.1360426273735836, rel=1e-12)


def test_selective_p_empty_region_is_an_error():
    with pytest.raises(ValueError, match="empty"):
        selective_p(IntervalSet(), 1.0, 1.0)


def _random_region(rng):
    cuts = np.sort(rng.uniform(-6, 6, size=2 * rng.integers(1, 5)))
    return [(cuts[2 * i], cuts[2 * i + 1]) for i in range(len(cuts) // 2)]


@pytest.mark.parametrize("seed", range(12))
def test_selective_p_matches_high_precision_reference(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        pairs = _random_region(rng)
        k = rng.integers(0, len(pairs))
        lo, hi = pairs[k]
        z = float(rng.uniform(lo, hi))
        sd = float(10 ** rng.uniform(-0.5, 0.5))
        got = selective_p(pairs, z, sd)
        want = mp_selective_p(pairs, z, sd)
        assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


def test_selective_p_scale_invariance():
    rng = np.random.default_rng(8)
    pairs = _random_region(rng)
    z = 0.5 * (pairs[0][0] + pairs[0][1])
    base = selective_p(pairs, z, 1.0)
    for k in (0.01, 3.0, 250.0):
        scaled = [(lo * k, hi * k) for lo, hi in pairs]
        assert selective_p(scaled, z * k, k) == pytest.approx(base, rel=1e-10)


def test_selective_p_sign_symmetry():
    pairs = [(-4.0, -2.0), (2.0, 4.0)]
    assert selective_p(pairs, 3.0, 1.0) == pytest.approx(
        selective_p(pairs, -3.0, 1.0), rel=1e-12)


def test_selective_p_deep_tail_float_route():
    # region mass ~1e-138: still within float range
    pairs = [(25.0, 26.0), (30.0, 31.0)]
    got = selective_p(pairs, 30.5, 1.0)
    want = mp_selective_p(pairs, 30.5, 1.0)
    assert got == pytest.approx(want, rel=1e-10)


def test_selective_p_tiny_mass_switches_to_high_precision():
    # region mass ~1e-213: beyond the float ratio guard, below nothing else
    pairs = [(31.0, 32.0)]
    got = selective_p(pairs, 31.5, 1.0)
    want = mp_selective_p(pairs, 31.5, 1.0)
    assert 0.0 < got < 1.0
    assert got == pytest.approx(want, rel=1e-10)


def test_selective_p_underflow_raises():
    with pytest.raises(MassUnderflowError):
        selective_p([(40.0, 41.0)], 40.5, 1.0)


# ------------------------------------------------------------------ baselines

def test_naive_p_frozen_value():
    assert naive_p(1.0, 1.0) == pytest.approx(0.3173105078629141, rel=1e-12)
    assert naive_p(-1.0, 1.0) == pytest.approx(0.3173105078629141, rel=1e-12)
    assert naive_p(0.0, 1.0) == 1.0


def test_naive_p_matches_reference():
    rng = np.random.default_rng(9)
    for _ in range(100):
        z = float(rng.uniform(-30, 30))
        sd = float(10 ** rng.uniform(-1, 1))
        assert naive_p(z, sd) == pytest.approx(mp_two_sided_p(z, sd), rel=1e-10)


def test_bonferroni_power_of_two_is_exact():
    # naive p of this z is irrelevant; use the doubling identity directly
    p0 = naive_p(3.0, 1.0)
    assert bonferroni_p(3.0, 1.0, 1) == pytest.approx(2 * p0, rel=0)
    assert bonferroni_p(3.0, 1.0, 0) == p0


def test_bonferroni_caps_at_one():
    assert bonferroni_p(1.0, 1.0, 10) == 1.0
    assert bonferroni_p(5.0, 1.0, 2000) == 1.0  # ldexp overflows; capped


def test_bonferroni_matches_log_space_reference():
    rng = np.random.default_rng(10)
    for _ in range(100):
        z = float(rng.uniform(0, 40))
        n = int(rng.integers(1, 300))
        got = bonferroni_p(z, 1.0, n)
        want = bonferroni_reference(naive_p(z, 1.0), n)
        assert got == pytest.approx(want, rel=1e-10)


def test_bonferroni_rejects_negative_n():
    with pytest.raises(ValueError):
        bonferroni_p(1.0, 1.0, -1)


def test_oc_p_is_single_interval_selective():
    cell = (1.5, 4.0)
    assert oc_p(2.0, 1.0, cell) == pytest.approx(
        selective_p([cell], 2.0, 1.0), rel=1e-12)
    assert oc_p(2.0, 1.0, cell) == pytest.approx(
        mp_selective_p([cell], 2.0, 1.0), rel=1e-10)
