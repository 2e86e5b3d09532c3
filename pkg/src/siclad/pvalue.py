"""Truncated-normal p-values and their uncorrected/overcorrected baselines.

All masses refer to a centered normal with known scale ``sd`` (the null law
of the test statistic).  The float path evaluates interval masses as scaled
``erfc`` differences taken in whichever tail avoids subtraction of near-equal
terms; whenever the difference still cancels badly, or the total region mass
is too small for float ratios, the computation is redone in high-precision
arithmetic.  Masses below ``MIN_DEN`` cannot be normalized meaningfully and
raise :class:`MassUnderflowError`.
"""

from __future__ import annotations

import math

import mpmath
from scipy.special import erfc

from .errors import MassUnderflowError
from .region import IntervalSet

CANCEL_GUARD = 0.01   # redo in high precision when the difference loses this much
TINY_DEN = 1e-200     # below this, form the ratio in high precision
MIN_DEN = 1e-300      # below this, the region mass is not normalizable
MP_DPS = 60


def _mass_float(lo: float, hi: float, sd: float) -> tuple[float, bool]:
    """Float-precision interval mass and whether it needs the precise path."""
    rt = sd * math.sqrt(2.0)
    if lo >= 0.0:
        t_big = erfc(lo / rt)
        mass = 0.5 * (t_big - erfc(hi / rt))
        big = 0.5 * t_big
    elif hi <= 0.0:
        t_big = erfc(-hi / rt)
        mass = 0.5 * (t_big - erfc(-lo / rt))
        big = 0.5 * t_big
    else:
        mass = 1.0 - 0.5 * (erfc(-lo / rt) + erfc(hi / rt))
        big = 1.0
    return mass, mass < CANCEL_GUARD * big


def _mass_mp(lo: float, hi: float, sd: float):
    """Interval mass as an mpmath scalar (callers manage the precision)."""
    rt = mpmath.mpf(sd) * mpmath.sqrt(2)
    a = mpmath.mpf(lo) / rt if math.isfinite(lo) else mpmath.mpf("-inf")
    b = mpmath.mpf(hi) / rt if math.isfinite(hi) else mpmath.mpf("+inf")
    return 0.5 * (mpmath.erfc(a) - mpmath.erfc(b))


def gaussian_interval_mass(lo: float, hi: float, sd: float) -> float:
    """P(lo <= Z <= hi) for Z ~ N(0, sd^2), accurate into the far tails."""
    if not sd > 0:
        raise ValueError(f"sd must be positive, got {sd}")
    if hi <= lo:
        return 0.0
    mass, imprecise = _mass_float(lo, hi, sd)
    if imprecise:
        with mpmath.workdps(MP_DPS):
            mass = float(_mass_mp(lo, hi, sd))
    return max(mass, 0.0)


def _as_pairs(region) -> list[tuple[float, float]]:
    if isinstance(region, IntervalSet):
        return [(lo, hi) for lo, hi in region]
    return [(float(lo), float(hi)) for lo, hi in region]


def selective_p(region, z_obs: float, sd: float) -> float:
    """Two-sided p-value of z_obs under N(0, sd^2) truncated to ``region``.

    p = P(|Z| >= |z_obs|, Z in region) / P(Z in region).
    """
    pairs = _as_pairs(region)
    if not pairs:
        raise ValueError("truncation region is empty")
    t = abs(float(z_obs))
    tail = IntervalSet([(-math.inf, -t), (t, math.inf)])
    num_pairs = _as_pairs(IntervalSet(pairs).intersect(tail))

    den = sum(gaussian_interval_mass(lo, hi, sd) for lo, hi in pairs)
    if den >= TINY_DEN:
        num = sum(gaussian_interval_mass(lo, hi, sd) for lo, hi in num_pairs)
        return min(max(num / den, 0.0), 1.0)

    # the region sits so deep in the tails that the ratio itself needs
    # high-precision arithmetic end to end
    with mpmath.workdps(MP_DPS):
        den_mp = mpmath.fsum(_mass_mp(lo, hi, sd) for lo, hi in pairs)
        if den_mp < mpmath.mpf(MIN_DEN):
            raise MassUnderflowError(
                f"truncation region mass {mpmath.nstr(den_mp, 3)} is too small "
                "to normalize")
        num_mp = mpmath.fsum(_mass_mp(lo, hi, sd) for lo, hi in num_pairs)
        return min(max(float(num_mp / den_mp), 0.0), 1.0)


def oc_p(z_obs: float, sd: float, cell: tuple[float, float]) -> float:
    """Selective p-value conditioned on a single interval (over-conditioned)."""
    return selective_p([cell], z_obs, sd)


def naive_p(z_obs: float, sd: float) -> float:
    """Two-sided normal p-value ignoring the selection: 2*(1 - Phi(|z|/sd))."""
    if not sd > 0:
        raise ValueError(f"sd must be positive, got {sd}")
    return float(erfc(abs(z_obs) / (sd * math.sqrt(2.0))))


def bonferroni_p(z_obs: float, sd: float, n: int) -> float:
    """Naive p-value corrected by the 2^n selection possibilities, capped at 1.

    The power-of-two scaling goes through ``math.ldexp`` so no intermediate
    overflows or precision loss occur even for large n.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    p0 = naive_p(z_obs, sd)
    if p0 == 0.0:
        return 0.0
    try:
        adjusted = math.ldexp(p0, n)
    except OverflowError:
        return 1.0
    return min(1.0, adjusted)
