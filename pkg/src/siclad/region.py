"""Truncation regions: where along the test line the detection output repeats.

Sliding the data along the line x(z) = a + b*z turns every pairwise squared
distance into a quadratic in z, so the detector's output is piecewise
constant: the line decomposes into cells bounded by quadratic roots (plus,
for signed multivariate tests, roots of the per-feature deviation lines).
The truncation region is the union of cells whose anomaly set -- and sign
pattern, when d > 1 -- equals the observed one.

The search walks the window cell by cell, jumping just past each cell's right
endpoint; whenever a jump lands beyond a cell boundary it bisects the stretch
it stepped over, so cells narrower than the step size are still found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RegionConsistencyError
from .hypothesis import LineParam
from .model import DbscanParams

MERGE_TOL = 1e-12     # intervals closer than this are fused
GAP_TOL = 1e-12       # stretches narrower than this are not bisected further
PROBE_BUDGET = 64     # bisection evaluations allowed per overstepped stretch
DEFAULT_DELTA = 1e-3
DEFAULT_SPAN = 20.0


class IntervalSet:
    """A union of closed intervals kept sorted, disjoint, and merged.

    Endpoints may be infinite.  Intervals whose endpoints are within
    ``MERGE_TOL`` of touching are fused; reversed pairs are dropped.
    """

    __slots__ = ("_ivs",)

    def __init__(self, pairs=()):
        cleaned = [(float(lo), float(hi)) for lo, hi in pairs if hi >= lo]
        cleaned.sort()
        merged: list[list[float]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1] + MERGE_TOL:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        self._ivs = tuple((lo, hi) for lo, hi in merged)

    @property
    def intervals(self) -> np.ndarray:
        """An (k, 2) array of the interval endpoints."""
        return np.array(self._ivs, dtype=float).reshape(-1, 2)

    @property
    def is_empty(self) -> bool:
        return not self._ivs

    @property
    def width(self) -> float:
        return float(sum(hi - lo for lo, hi in self._ivs))

    def contains(self, z: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= z <= hi + tol for lo, hi in self._ivs)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self._ivs) + list(other._ivs))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for alo, ahi in self._ivs:
            for blo, bhi in other._ivs:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if hi >= lo:
                    out.append((lo, hi))
        return IntervalSet(out)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        return self.intersect(IntervalSet([(lo, hi)]))

    def __len__(self) -> int:
        return len(self._ivs)

    def __iter__(self):
        return iter(self._ivs)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self._ivs == other._ivs

    def __hash__(self):
        return hash(self._ivs)

    def __repr__(self) -> str:
        body = " u ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in self._ivs)
        return f"IntervalSet({body or 'empty'})"


def _stable_roots(p: float, q: float, c: float) -> tuple[float, float]:
    """Sorted roots of p*z^2 + q*z + c for p > 0 and positive discriminant."""
    disc = q * q - 4.0 * p * c
    sq = math.sqrt(max(disc, 0.0))
    num = -(q + math.copysign(sq, q)) / 2.0
    r_a = num / p
    r_b = c / num if num != 0.0 else 0.0
    return (r_a, r_b) if r_a <= r_b else (r_b, r_a)


def pair_quadratic(a: np.ndarray, b: np.ndarray, n: int, d: int, i: int, j: int,
                   sigma: int, eps: float) -> tuple[float, float, float]:
    """Coefficients (p, q, t) of the pair constraint p*z^2 + q*z + t <= 0.

    The squared distance between points i and j along the line is
    ``ph*z^2 + qh*z + th`` with ``ph = |b_i - b_j|^2``,
    ``qh = 2 (a_i - a_j).(b_i - b_j)``, ``th = |a_i - a_j|^2`` (sums over
    features).  ``sigma = +1`` encodes "within eps", ``sigma = -1`` encodes
    "apart"; the returned triple is sigma-scaled with eps^2 folded into t:
    ``(sigma*ph, sigma*qh, sigma*(th - eps^2))``.
    """
    if sigma not in (-1, 1):
        raise ValueError(f"sigma must be +1 or -1, got {sigma}")
    av = np.asarray(a, float).reshape((n, d), order="F")
    bv = np.asarray(b, float).reshape((n, d), order="F")
    da = av[i] - av[j]
    db = bv[i] - bv[j]
    ph = float(db @ db)
    qh = float(2.0 * (da @ db))
    th = float(da @ da)
    return sigma * ph, sigma * qh, sigma * (th - eps * eps)


def quadratic_solution_set(p: float, q: float, t: float) -> IntervalSet:
    """The set {z : p*z^2 + q*z + t <= 0} as an IntervalSet."""
    inf = math.inf
    if p == 0.0:
        if q == 0.0:
            return IntervalSet([(-inf, inf)]) if t <= 0.0 else IntervalSet()
        x = -t / q
        return IntervalSet([(-inf, x)]) if q > 0.0 else IntervalSet([(x, inf)])
    disc = q * q - 4.0 * p * t
    if p > 0.0:
        if disc < 0.0:
            return IntervalSet()
        if disc == 0.0:
            r = -q / (2.0 * p)
            return IntervalSet([(r, r)])
        r1, r2 = _stable_roots(p, q, t)
        return IntervalSet([(r1, r2)])
    # downward parabola: <= 0 outside the roots (everywhere if no real roots)
    if disc <= 0.0:
        return IntervalSet([(-inf, inf)])
    r1, r2 = _stable_roots(-p, -q, -t)
    return IntervalSet([(-inf, r1), (r2, inf)])


@dataclass(frozen=True)
class SignContext:
    """Observed sign pattern of anomaly j's deviations, for d > 1 tests.

    ``signs`` has one entry per feature in {-1, 0, +1}; zero-sign features are
    not conditioned on.  ``inliers`` are the indices whose centroid the
    deviations are measured against.
    """

    j: int
    signs: np.ndarray
    inliers: np.ndarray


class _LineGeometry:
    """Per-hypothesis precomputation for evaluating cells along the line.

    Everything z-independent is done once: condensed pair coefficient arrays,
    their roots and vertices, and the affine per-feature deviation lines of
    the sign pattern.  ``cell(z)`` then costs a handful of vector operations.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, n: int, d: int, eps: float,
                 min_pts: int | None, noise_obs: np.ndarray | None,
                 sign_ctx: SignContext | None):
        self.n = n
        self.eps2 = eps * eps
        self.min_pts = min_pts
        self.noise_obs = noise_obs
        av = np.asarray(a, float).reshape((n, d), order="F")
        bv = np.asarray(b, float).reshape((n, d), order="F")
        iu, ju = np.triu_indices(n, 1)
        da = av[iu] - av[ju]
        db = bv[iu] - bv[ju]
        ph = np.einsum("ij,ij->i", db, db)
        qh = 2.0 * np.einsum("ij,ij->i", da, db)
        th = np.einsum("ij,ij->i", da, da)
        c = th - self.eps2
        disc = qh * qh - 4.0 * ph * c
        # pairs whose distance never crosses eps keep a constant within/apart
        # state along the whole line; only the rooted ones need per-z work
        rooted = (ph > 0.0) & (disc > 0.0)
        self.iu_r, self.ju_r = iu[rooted], ju[rooted]
        self.ph_r, self.qh_r, self.th_r = ph[rooted], qh[rooted], th[rooted]
        qr, pr = qh[rooted], ph[rooted]
        sq = np.sqrt(disc[rooted])
        num = -(qr + np.copysign(sq, qr)) / 2.0
        r_a = num / pr
        safe = np.where(num == 0.0, 1.0, num)
        r_b = np.where(num == 0.0, 0.0, c[rooted] / safe)
        self.r1 = np.minimum(r_a, r_b)
        self.r2 = np.maximum(r_a, r_b)
        self.vertex = -qr / (2.0 * pr)

        # a static pair is within iff its constant distance clears eps; moving
        # pairs that never reach eps (disc <= 0) stay apart for every z
        idx = np.flatnonzero(~rooted)
        within_static = (ph[idx] == 0.0) & (th[idx] <= self.eps2)
        adj_static = np.zeros((n, n))
        si, sj = iu[idx[within_static]], ju[idx[within_static]]
        adj_static[si, sj] = 1.0
        adj_static[sj, si] = 1.0
        self.adj_static = adj_static
        self.deg_static = adj_static.sum(axis=1)

        self.sign_slope = None
        if sign_ctx is not None:
            support = np.flatnonzero(np.asarray(sign_ctx.signs) != 0)
            centroid_a = av[sign_ctx.inliers].mean(axis=0)
            centroid_b = bv[sign_ctx.inliers].mean(axis=0)
            self.sign_int = (av[sign_ctx.j] - centroid_a)[support]
            self.sign_slope = (bv[sign_ctx.j] - centroid_b)[support]
            self.sign_target = np.asarray(sign_ctx.signs, float)[support]

    def cell(self, z: float) -> tuple[float, float, bool | None]:
        """The state-constant cell [L, R] around z and whether it is accepted.

        ``accepted`` is None when the geometry was built without a reference
        noise set (pure component queries).
        """
        d2 = (self.ph_r * z + self.qh_r) * z + self.th_r
        within = d2 <= self.eps2

        accepted = None
        if self.noise_obs is not None:
            w = within.astype(float)
            deg = (self.deg_static
                   + np.bincount(self.iu_r, weights=w, minlength=self.n)
                   + np.bincount(self.ju_r, weights=w, minlength=self.n))
            core = deg + 1.0 >= self.min_pts
            wc_i = (within & core[self.ju_r]).astype(float)
            wc_j = (within & core[self.iu_r]).astype(float)
            corenb = (self.adj_static @ core.astype(float)
                      + np.bincount(self.iu_r, weights=wc_i, minlength=self.n)
                      + np.bincount(self.ju_r, weights=wc_j, minlength=self.n))
            noise = ~core & (corenb == 0.0)
            accepted = bool(np.array_equal(noise, self.noise_obs))

        right = z >= self.vertex
        lows = np.where(within, self.r1, np.where(right, self.r2, -np.inf))
        ups = np.where(within, self.r2, np.where(right, np.inf, self.r1))
        lo = float(lows.max(initial=-np.inf))
        hi = float(ups.min(initial=np.inf))

        # Sign cuts only matter where the anomaly set already matches (cells
        # with a different noise set are rejected whole, so oversized bounds
        # there only make the walk faster), and for pure component queries.
        if self.sign_slope is not None and accepted is not False:
            g = self.sign_int + self.sign_slope * z
            if accepted and not np.array_equal(np.sign(g), self.sign_target):
                accepted = False
            moving = self.sign_slope != 0.0
            if moving.any():
                zk = -self.sign_int[moving] / self.sign_slope[moving]
                is_lower = (g[moving] > 0.0) == (self.sign_slope[moving] > 0.0)
                if is_lower.any():
                    lo = max(lo, float(zk[is_lower].max()))
                if (~is_lower).any():
                    hi = min(hi, float(zk[~is_lower].min()))
        return lo, hi, accepted


def feasible_component_at(a: np.ndarray, b: np.ndarray, n: int, d: int,
                          eps: float, z0: float) -> tuple[float, float]:
    """The maximal interval around z0 on which every pair keeps its
    within/apart state (the neighborhood structure is frozen)."""
    geom = _LineGeometry(a, b, n, d, eps, None, None, None)
    lo, hi, _ = geom.cell(z0)
    return lo, hi


def over_conditioned_region(a: np.ndarray, b: np.ndarray, n: int, d: int,
                            eps: float, z0: float,
                            sign_context: SignContext | None = None) -> IntervalSet:
    """The single state-constant cell at z0, as an IntervalSet.

    With a sign context the cell is additionally cut at the sign roots of the
    deviation lines, matching the conditioning of the signed test.
    """
    geom = _LineGeometry(a, b, n, d, eps, None, None, sign_context)
    lo, hi, _ = geom.cell(z0)
    return IntervalSet([(lo, hi)])


@dataclass(frozen=True)
class RegionSearchResult:
    """Outcome of a truncation-region search along one test line."""

    region: IntervalSet
    observed_cell: tuple[float, float]
    z_min: float
    z_max: float
    steps: int


def _probe_gap(geom: _LineGeometry, lo: float, hi: float,
               cells: list[tuple[float, float]]) -> int:
    """Bisect an overstepped stretch (lo, hi), recording accepted cells."""
    steps = 0
    stack = [(lo, hi)]
    while stack and steps < PROBE_BUDGET:
        glo, ghi = stack.pop()
        if ghi - glo <= GAP_TOL:
            continue
        zm = 0.5 * (glo + ghi)
        cl, ch, acc = geom.cell(zm)
        steps += 1
        if acc:
            cells.append((cl, ch))
        stack.append((glo, min(cl, zm)))
        stack.append((max(ch, zm), ghi))
    return steps


def line_search(line: LineParam, params: DbscanParams, anomalies: np.ndarray,
                n: int, d: int, *, sign_context: SignContext | None = None,
                delta: float = DEFAULT_DELTA, span: float = DEFAULT_SPAN
                ) -> RegionSearchResult:
    """Find every cell in the search window that reproduces the observation.

    The window is ``[min(z_obs, 0) - span*sd, max(z_obs, 0) + span*sd]`` where
    ``sd`` is the null scale of z.  The cell containing ``z_obs`` must be
    accepted (the walk re-derives the detection there); anything else means
    the geometry and the detector disagree and raises
    :class:`RegionConsistencyError`.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not span > 0:
        raise ValueError(f"span must be positive, got {span}")
    if d > 1 and sign_context is None:
        raise ValueError("d > 1 requires the observed sign context")
    noise_obs = np.zeros(n, dtype=bool)
    noise_obs[np.asarray(anomalies, dtype=int)] = True
    geom = _LineGeometry(line.a, line.b, n, d, params.eps, params.min_pts,
                         noise_obs, sign_context)
    sd = line.sd
    z_min = min(line.z_obs, 0.0) - span * sd
    z_max = max(line.z_obs, 0.0) + span * sd

    obs_lo, obs_hi, obs_ok = geom.cell(line.z_obs)
    if not obs_ok:
        raise RegionConsistencyError(
            "the cell at the observed statistic does not reproduce the "
            "observed detection; line geometry and detector disagree")
    cells: list[tuple[float, float]] = [(obs_lo, obs_hi)]

    max_steps = 4 * int((z_max - z_min) / delta) + 1000
    steps = 0
    z = z_min
    prev_hi: float | None = None
    while z <= z_max:
        steps += 1
        if steps > max_steps:
            raise RegionConsistencyError(
                f"region search failed to advance within {max_steps} steps")
        lo, hi, acc = geom.cell(z)
        if acc:
            cells.append((lo, hi))
        if prev_hi is not None and lo > prev_hi + GAP_TOL:
            steps += _probe_gap(geom, prev_hi, lo, cells)
        prev_hi = hi
        z = max(hi, z) + delta
    if prev_hi is not None and prev_hi < z_max:
        steps += _probe_gap(geom, prev_hi, z_max, cells)

    region = IntervalSet(cells).clip(z_min, z_max)
    observed_cell = (max(obs_lo, z_min), min(obs_hi, z_max))
    if not region.contains(line.z_obs, tol=1e-9):
        raise RegionConsistencyError(
            "search window does not contain the observed statistic's cell")
    return RegionSearchResult(region=region, observed_cell=observed_cell,
                              z_min=z_min, z_max=z_max, steps=steps)
