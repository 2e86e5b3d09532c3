import numpy as np
import pytest

from siclad.dbscan import detect_anomalies
from siclad.errors import RegionConsistencyError
from siclad.hypothesis import direction_1d, direction_md, line_parameterization
from siclad.model import DataMatrix, DbscanParams, build_covariance
from siclad.region import (
    IntervalSet,
    SignContext,
    feasible_component_at,
    line_search,
    over_conditioned_region,
    pair_quadratic,
    quadratic_solution_set,
)

from oracles import enumerate_region, line_membership, union_width


# ---------------------------------------------------------------- IntervalSet

def test_interval_set_sorts_and_merges():
    s = IntervalSet([(3.0, 4.0), (1.0, 2.0), (1.5, 2.5)])
    assert s.intervals.tolist() == [[1.0, 2.5], [3.0, 4.0]]
    assert len(s) == 2
    assert s.width == pytest.approx(2.5)


def test_interval_set_merge_tolerance():
    near = IntervalSet([(0.0, 1.0), (1.0 + 5e-13, 2.0)])
    assert len(near) == 1
    apart = IntervalSet([(0.0, 1.0), (1.0 + 1e-9, 2.0)])
    assert len(apart) == 2


def test_interval_set_drops_reversed_keeps_points():
    assert IntervalSet([(2.0, 1.0)]).is_empty
    pt = IntervalSet([(1.0, 1.0)])
    assert len(pt) == 1 and pt.width == 0.0


def test_interval_set_contains_is_closed():
    s = IntervalSet([(0.0, 1.0)])
    assert s.contains(0.0) and s.contains(1.0) and s.contains(0.5)
    assert not s.contains(1.0 + 1e-9)
    assert s.contains(1.0 + 1e-9, tol=1e-8)


def test_interval_set_union_intersect_clip():
    a = IntervalSet([(0.0, 2.0), (5.0, 7.0)])
    b = IntervalSet([(1.0, 6.0)])
    assert a.union(b).intervals.tolist() == [[0.0, 7.0]]
    assert a.intersect(b).intervals.tolist() == [[1.0, 2.0], [5.0, 6.0]]
    assert a.clip(1.5, 5.5).intervals.tolist() == [[1.5, 2.0], [5.0, 5.5]]
    assert a.intersect(IntervalSet()).is_empty


def test_interval_set_infinite_width():
    s = IntervalSet([(-np.inf, 0.0)])
    assert s.width == np.inf
    assert s.clip(-3.0, 3.0).intervals.tolist() == [[-3.0, 0.0]]


@pytest.mark.parametrize("seed", range(5))
def test_interval_set_membership_matches_brute_union(seed):
    rng = np.random.default_rng(seed)
    pairs = [(lo, lo + w) for lo, w in zip(rng.uniform(-5, 5, 12), rng.uniform(0, 2, 12))]
    s = IntervalSet(pairs)
    t = IntervalSet([(lo, lo + w) for lo, w in zip(rng.uniform(-5, 5, 8), rng.uniform(0, 2, 8))])
    for z in rng.uniform(-6, 8, 200):
        in_s = any(lo <= z <= hi for lo, hi in pairs)
        assert s.contains(z) == in_s
        assert s.intersect(t).contains(z) == (in_s and t.contains(z))
        assert s.union(t).contains(z) == (in_s or t.contains(z))
    assert s.width == pytest.approx(union_width(pairs))


# ------------------------------------------------------------ pair quadratics

A_HAND = np.array([0.0, 0.2, 3.0])
B_HAND = np.array([-1 / 3, -1 / 3, 2 / 3])


def test_pair_quadratic_hand_example():
    p, q, t = pair_quadratic(A_HAND, B_HAND, n=3, d=1, i=0, j=2, sigma=1, eps=0.2)
    assert (p, q) == pytest.approx((1.0, 6.0))
    assert t == pytest.approx(9.0 - 0.04)
    sol = quadratic_solution_set(p, q, t)
    assert np.allclose(sol.intervals, [[-3.2, -2.8]])


def test_pair_quadratic_flipped_sign_complements():
    p, q, t = pair_quadratic(A_HAND, B_HAND, n=3, d=1, i=0, j=2, sigma=-1, eps=0.2)
    assert (p, q, t) == pytest.approx((-1.0, -6.0, -(9.0 - 0.04)))
    sol = quadratic_solution_set(p, q, t)
    ivs = sol.intervals
    assert ivs.shape == (2, 2)
    assert ivs[0][0] == -np.inf and ivs[1][1] == np.inf
    assert (ivs[0][1], ivs[1][0]) == pytest.approx((-3.2, -2.8))


def test_pair_quadratic_rejects_bad_sigma():
    with pytest.raises(ValueError, match="sigma"):
        pair_quadratic(A_HAND, B_HAND, 3, 1, 0, 2, sigma=0, eps=0.2)


def test_pair_quadratic_constant_distance_pair():
    # equal slopes: the pair never changes distance
    p, q, t = pair_quadratic(A_HAND, B_HAND, n=3, d=1, i=0, j=1, sigma=1, eps=0.5)
    assert p == 0.0 and q == 0.0
    assert t == pytest.approx(0.04 - 0.25)
    assert quadratic_solution_set(p, q, t).intervals.tolist() == [[-np.inf, np.inf]]


def test_quadratic_solution_set_degenerate_branches():
    assert quadratic_solution_set(0.0, 0.0, 1.0).is_empty
    assert quadratic_solution_set(0.0, 2.0, -4.0).intervals.tolist() == [[-np.inf, 2.0]]
    assert quadratic_solution_set(0.0, -2.0, -4.0).intervals.tolist() == [[-2.0, np.inf]]
    assert quadratic_solution_set(1.0, 0.0, 1.0).is_empty          # always positive
    assert quadratic_solution_set(1.0, -2.0, 1.0).intervals.tolist() == [[1.0, 1.0]]
    assert quadratic_solution_set(-1.0, 0.0, -1.0).intervals.tolist() == [[-np.inf, np.inf]]


@pytest.mark.parametrize("seed", range(10))
def test_quadratic_solution_set_matches_sign_of_polynomial(seed):
    rng = np.random.default_rng(seed)
    p, q, t = rng.normal(size=3) * rng.choice([0.1, 1.0, 10.0], size=3)
    sol = quadratic_solution_set(float(p), float(q), float(t))
    for z in rng.uniform(-20, 20, 100):
        val = (p * z + q) * z + t
        if abs(val) < 1e-9:
            continue  # too close to a root to classify robustly
        assert sol.contains(z) == (val < 0)


# --------------------------------------------------------- component queries

def test_feasible_component_hand_example():
    lo, hi = feasible_component_at(A_HAND, B_HAND, n=3, d=1, eps=0.2, z0=2.9)
    assert lo == pytest.approx(-2.6)
    assert hi == np.inf


@pytest.mark.parametrize("seed", range(6))
def test_feasible_component_freezes_pair_states(seed):
    rng = np.random.default_rng(seed)
    n, d = 8, 2
    a = rng.normal(size=n * d)
    b = rng.normal(size=n * d)
    z0 = float(rng.uniform(-2, 2))
    lo, hi = feasible_component_at(a, b, n, d, eps=1.0, z0=z0)
    assert lo <= z0 <= hi

    def states(z):
        x = (a + b * z).reshape((n, d), order="F")
        diff = x[:, None, :] - x[None, :, :]
        return (np.einsum("ijk,ijk->ij", diff, diff) <= 1.0)

    ref = states(z0)
    for frac in (0.25, 0.5, 0.75):
        z = lo + frac * (min(hi, lo + 10) - lo)
        if lo < z < hi:
            assert np.array_equal(states(z), ref)
    # just outside a finite endpoint some pair must have flipped
    for edge, shift in ((lo, -1e-6), (hi, 1e-6)):
        if np.isfinite(edge):
            assert not np.array_equal(states(edge + shift), ref)


def test_over_conditioned_region_is_single_interval():
    reg = over_conditioned_region(A_HAND, B_HAND, n=3, d=1, eps=0.2, z0=2.9)
    (lo, hi), = reg.intervals.tolist()
    assert lo == pytest.approx(-2.6)
    assert hi == np.inf


def test_over_conditioned_region_sign_cut():
    # anomaly at (0.3, 0.3) drifting left in feature 0; inliers pinned at the
    # origin and never within eps, so only the sign flip at z = 0.3 cuts
    a = np.array([0.0, 0.0, 0.3, 0.0, 0.0, 0.3])   # n=3, d=2 (column stacked)
    b = np.array([0.0, 0.0, -1.0, 0.0, 0.0, 0.0])
    ctx = SignContext(j=2, signs=np.array([1.0, 1.0]), inliers=np.array([0, 1]))
    reg = over_conditioned_region(a, b, n=3, d=2, eps=0.1, z0=0.0, sign_context=ctx)
    (lo, hi), = reg.intervals.tolist()
    assert lo == -np.inf
    assert hi == pytest.approx(0.3)


# ----------------------------------------------------------------- the search

def _prepare_1d(x, eps, min_pts, sigma2=1.0):
    xm = DataMatrix(np.asarray(x, dtype=float))
    params = DbscanParams(eps=eps, min_pts=min_pts)
    det = detect_anomalies(xm, params)
    assert det.anomalies.size > 0
    j = int(det.anomalies[-1])
    eta = direction_1d(xm.n, j, det.anomalies)
    cov = build_covariance("scalar", n=xm.n, d=1, sigma2=sigma2)
    line = line_parameterization(xm.vec(), eta, cov)
    return xm, params, det, j, line


def test_line_search_hand_instance():
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    res = line_search(line, params, det.anomalies, n=4, d=1)
    assert res.region.contains(line.z_obs)
    # the moving anomaly passes through the trio once, splitting the region
    assert len(res.region) == 2
    member = line_membership(line, 4, 1, params, det.anomalies.tolist())
    oracle = enumerate_region(line, 4, 1, params, member, res.z_min, res.z_max)
    assert np.allclose(res.region.intervals, np.array(oracle), atol=1e-7)


def test_line_search_contains_observed_cell_and_window():
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    res = line_search(line, params, det.anomalies, n=4, d=1)
    lo, hi = res.observed_cell
    assert res.region.contains(lo) and res.region.contains(hi)
    ivs = res.region.intervals
    assert (ivs[:, 0] >= res.z_min - 1e-12).all()
    assert (ivs[:, 1] <= res.z_max + 1e-12).all()
    assert np.isfinite(ivs).all()


def _random_detected_instance(seed, d):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 13))
    x = rng.normal(size=(n, d)) if d > 1 else rng.normal(size=n)
    eps = float(rng.uniform(0.4, 0.9)) * (d ** 0.5)
    min_pts = int(rng.integers(2, 5))
    xm = DataMatrix(x)
    params = DbscanParams(eps=eps, min_pts=min_pts)
    det = detect_anomalies(xm, params)
    return xm, params, det


@pytest.mark.parametrize("seed", range(40))
def test_line_search_matches_enumeration_oracle_1d(seed):
    xm, params, det = _random_detected_instance(seed, d=1)
    if det.anomalies.size == 0 or det.anomalies.size == xm.n:
        pytest.skip("instance detects nothing (or everything)")
    j = int(det.anomalies[0])
    eta = direction_1d(xm.n, j, det.anomalies)
    cov = build_covariance("scalar", n=xm.n, d=1, sigma2=1.0)
    line = line_parameterization(xm.vec(), eta, cov)
    res = line_search(line, params, det.anomalies, n=xm.n, d=1)
    member = line_membership(line, xm.n, 1, params, det.anomalies.tolist())
    oracle = enumerate_region(line, xm.n, 1, params, member, res.z_min, res.z_max)
    got = res.region.intervals
    assert got.shape == (len(oracle), 2)
    assert np.allclose(got, np.array(oracle), atol=1e-7)


@pytest.mark.parametrize("seed", range(25))
def test_line_search_matches_enumeration_oracle_3d(seed):
    xm, params, det = _random_detected_instance(seed + 1000, d=3)
    if det.anomalies.size == 0 or det.anomalies.size == xm.n:
        pytest.skip("instance detects nothing (or everything)")
    j = int(det.anomalies[0])
    eta, signs, _ = direction_md(xm, j, det.anomalies)
    cov = build_covariance("ar1", n=xm.n, d=3, rho=0.3)
    line = line_parameterization(xm.vec(), eta, cov)
    ctx = SignContext(j=j, signs=signs, inliers=det.inliers)
    res = line_search(line, params, det.anomalies, n=xm.n, d=3, sign_context=ctx)
    member = line_membership(line, xm.n, 3, params, det.anomalies.tolist(),
                             signs=signs, j=j)
    oracle = enumerate_region(line, xm.n, 3, params, member, res.z_min, res.z_max,
                              signs=signs, j=j, obs_anomalies=det.anomalies.tolist())
    got = res.region.intervals
    assert got.shape == (len(oracle), 2)
    assert np.allclose(got, np.array(oracle), atol=1e-7)
    assert res.region.contains(line.z_obs)


def test_line_search_with_coarse_step_still_exact():
    # a huge step forces the bisection fallback to find every cell
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    fine = line_search(line, params, det.anomalies, n=4, d=1)
    coarse = line_search(line, params, det.anomalies, n=4, d=1, delta=0.5)
    assert np.allclose(fine.region.intervals, coarse.region.intervals, atol=1e-9)


def test_line_search_is_deterministic():
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    r1 = line_search(line, params, det.anomalies, n=4, d=1)
    r2 = line_search(line, params, det.anomalies, n=4, d=1)
    assert r1.region == r2.region
    assert r1.steps == r2.steps


def test_line_search_argument_validation():
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    with pytest.raises(ValueError, match="delta"):
        line_search(line, params, det.anomalies, n=4, d=1, delta=0.0)
    with pytest.raises(ValueError, match="span"):
        line_search(line, params, det.anomalies, n=4, d=1, span=-1.0)
    with pytest.raises(ValueError, match="sign context"):
        line_search(line, params, det.anomalies, n=2, d=2)


def test_line_search_detects_inconsistent_observation():
    xm, params, det, j, line = _prepare_1d([0.0, 0.05, 0.1, 5.0], eps=0.2, min_pts=3)
    wrong = np.array([0])  # claim a different anomaly set than the line implies
    with pytest.raises(RegionConsistencyError):
        line_search(line, params, wrong, n=4, d=1)
