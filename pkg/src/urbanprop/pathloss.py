"""Deterministic path-loss models.

Implements the three multi-frequency model families in common use for
outdoor urban links — close-in (CI), close-in with frequency-dependent
exponent (CIF), and floating-intercept alpha-beta-gamma (ABG) — plus the
1 m free-space anchor they build on. Shadow fading is NOT applied here;
these functions return the mean path loss only (the drop engine adds the
random terms).

Frequencies are in GHz, distances in meters, results in dB. All functions
broadcast over numpy arrays and return a Python float for scalar inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    SPEED_OF_LIGHT,
    ValidationError,
    check_distance_m,
    check_frequency_ghz,
    scalar_or_array,
)

# ABG has no close-in anchor, so it stays evaluable below 1 m — but not at
# arbitrarily small distances where the log term is meaningless.
ABG_MIN_DISTANCE_M = 0.01


@dataclass(frozen=True)
class CiModel:
    """Close-in reference-distance model: FSPL(f, 1 m) + 10 n log10(d)."""

    n: float  # path-loss exponent

    def __post_init__(self):
        if not np.isfinite(self.n) or self.n <= 0.0:
            raise ValidationError(f"CI path-loss exponent must be > 0, got {self.n}")


@dataclass(frozen=True)
class CifModel:
    """CI with a linearly frequency-dependent exponent around f0.

    Reverts to the plain CI model when b = 0 or f = f0.
    """

    n: float  # path-loss exponent at f0
    b: float  # linear frequency-dependence slope
    f0_ghz: float  # centroid frequency of the data the model was fit on

    def __post_init__(self):
        if not np.isfinite(self.n) or self.n <= 0.0:
            raise ValidationError(f"CIF path-loss exponent must be > 0, got {self.n}")
        if not np.isfinite(self.b):
            raise ValidationError(f"CIF slope b must be finite, got {self.b}")
        if not np.isfinite(self.f0_ghz) or self.f0_ghz <= 0.0:
            raise ValidationError(f"CIF centroid frequency must be > 0 GHz, got {self.f0_ghz}")


@dataclass(frozen=True)
class AbgModel:
    """Floating-intercept model: 10 alpha log10(d) + beta + 10 gamma log10(f)."""

    alpha: float  # distance slope
    beta: float  # intercept, dB (may be any real)
    gamma: float  # frequency slope

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"ABG {name} must be finite, got {getattr(self, name)}")


def _fspl_1m(f_ghz):
    f_hz = np.asarray(f_ghz, dtype=float) * 1e9
    return 20.0 * np.log10(4.0 * np.pi * f_hz / SPEED_OF_LIGHT)


def fspl_1m(f_ghz):
    """Free-space path loss at the 1 m reference distance, in dB.

    Parameters
    ----------
    f_ghz : float or array_like
        Carrier frequency in GHz. Must be positive; values outside
        0.5-100 GHz raise a FrequencyRangeWarning but still evaluate.
    """
    check_frequency_ghz(f_ghz)
    return scalar_or_array(_fspl_1m(f_ghz))


def ci_pl(model: CiModel, f_ghz, d_m):
    """Close-in path loss: fspl_1m(f) + 10 n log10(d). Requires d >= 1 m."""
    check_frequency_ghz(f_ghz)
    check_distance_m(d_m, minimum=1.0, what="CI distance")
    d = np.asarray(d_m, dtype=float)
    return scalar_or_array(_fspl_1m(f_ghz) + 10.0 * model.n * np.log10(d))


def cif_pl(model: CifModel, f_ghz, d_m):
    """CIF path loss: fspl_1m(f) + 10 n (1 + b (f - f0)/f0) log10(d).

    Requires d >= 1 m (same close-in anchor as CI).
    """
    check_frequency_ghz(f_ghz)
    check_distance_m(d_m, minimum=1.0, what="CIF distance")
    f = np.asarray(f_ghz, dtype=float)
    d = np.asarray(d_m, dtype=float)
    n_eff = model.n * (1.0 + model.b * (f - model.f0_ghz) / model.f0_ghz)
    return scalar_or_array(_fspl_1m(f) + 10.0 * n_eff * np.log10(d))


def abg_pl(model: AbgModel, f_ghz, d_m):
    """ABG path loss: 10 alpha log10(d) + beta + 10 gamma log10(f_GHz).

    No close-in anchor, so d may go below 1 m (floor at 0.01 m).
    """
    check_frequency_ghz(f_ghz)
    check_distance_m(d_m, minimum=ABG_MIN_DISTANCE_M, what="ABG distance")
    f = np.asarray(f_ghz, dtype=float)
    d = np.asarray(d_m, dtype=float)
    pl = 10.0 * model.alpha * np.log10(d) + model.beta + 10.0 * model.gamma * np.log10(f)
    return scalar_or_array(pl)


def centroid_frequency(points) -> float:
    """Count-weighted centroid frequency of pooled multi-band data, in GHz.

    Parameters
    ----------
    points : sequence of (f_ghz, count) pairs
        One entry per frequency band; count is the number of measurements
        (or rays) taken at that frequency. Counts must be >= 1.
    """
    points = list(points)
    if not points:
        raise ValidationError("centroid_frequency needs at least one (frequency, count) pair")
    f = np.array([p[0] for p in points], dtype=float)
    n = np.array([p[1] for p in points], dtype=float)
    check_frequency_ghz(f)
    if np.any(n < 1.0):
        raise ValidationError(f"counts must be >= 1, got {n}")
    return float(np.sum(f * n) / np.sum(n))
