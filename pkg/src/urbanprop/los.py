"""Line-of-sight probability models as functions of 2D distance.

Three models: the two-parameter d1/d2 exponential model, its squared
variant, and the UMa model with a UE-height correction term. All are
frequency independent. Distances are 2D in meters; for indoor terminals
the caller substitutes the distance to the building's outer wall (see
``indoor_effective_distance`` and the geometry module).
"""

from __future__ import annotations

import numpy as np

from .core import D1D2Params, ValidationError, check_distance_m, scalar_or_array

# Height-correction constants for the UMa model: correction is zero below
# 13 m, grows as ((h-13)/10)^1.5 up to the 23 m ceiling, and is undefined
# above it.
UMA_H_LOW_M = 13.0
UMA_H_HIGH_M = 23.0
UMA_D1D2 = D1D2Params(d1=18.0, d2=63.0)


def p_los_d1d2(params: D1D2Params, d_m):
    """LOS probability min(d1/d, 1)(1 - e^(-d/d2)) + e^(-d/d2).

    Returns exactly 1.0 for d <= d1 and decays monotonically beyond it.
    """
    check_distance_m(d_m, what="LOS distance")
    d = np.asarray(d_m, dtype=float)
    with np.errstate(divide="ignore"):
        e = np.exp(-d / params.d2)
        tail = (params.d1 / d) * (1.0 - e) + e
    p = np.where(d <= params.d1, 1.0, np.clip(tail, 0.0, 1.0))
    return scalar_or_array(p)


def p_los_nyu_squared(params: D1D2Params, d_m):
    """Squared variant of the d1/d2 model (sharper LOS-to-NLOS transition)."""
    p = np.asarray(p_los_d1d2(params, d_m))
    return scalar_or_array(p * p)


def _height_gain(d, h_ut: float):
    """Height correction C(d, h): zero below 13 m, ((h-13)/10)^1.5 g(d) above."""
    if h_ut < UMA_H_LOW_M:
        return np.zeros_like(d)
    g = np.where(
        d > 18.0,
        1.25e-6 * np.square(d) * np.exp(-d / 150.0),
        0.0,
    )
    return ((h_ut - UMA_H_LOW_M) / 10.0) ** 1.5 * g


def p_los_3gpp_uma(d_m, h_ut_m: float):
    """UMa LOS probability with UE-height correction.

    p(d, h) = p_d1d2(18, 63; d) * (1 + C(d, h)), clamped to [0, 1].
    The correction is defined piecewise up to 23 m; taller UEs are
    rejected rather than extrapolated.

    Parameters
    ----------
    d_m : float or array_like
        2D AP-UE distance in meters.
    h_ut_m : float
        UE height in meters, 0 < h <= 23.
    """
    check_distance_m(d_m, what="LOS distance")
    if not np.isfinite(h_ut_m) or h_ut_m <= 0.0:
        raise ValidationError(f"UE height must be > 0 m, got {h_ut_m}")
    if h_ut_m > UMA_H_HIGH_M:
        raise ValidationError(
            f"UE height {h_ut_m} m exceeds the 23 m ceiling of the UMa height correction"
        )
    d = np.asarray(d_m, dtype=float)
    base = np.asarray(p_los_d1d2(UMA_D1D2, d))
    p = np.clip(base * (1.0 + _height_gain(d, h_ut_m)), 0.0, 1.0)
    return scalar_or_array(p)


def indoor_effective_distance(d_outer_wall_m):
    """Distance substitution for indoor terminals.

    For a UE inside a building, every LOS-probability model is evaluated
    at the 2D distance from the AP to the outer wall instead of to the UE
    itself; this is the identity on that already-computed wall distance
    (the geometry module computes it from a map).
    """
    check_distance_m(d_outer_wall_m, what="outer-wall distance")
    return scalar_or_array(np.asarray(d_outer_wall_m, dtype=float))
