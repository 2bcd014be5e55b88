"""Shared domain types, physical constants, and the built-in scenario catalog.

All frequencies in this package are carried in GHz and converted to Hz only
where a formula demands it; all distances are 2D distances in meters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Catalog-backed models are parameterized for this band; raw formula
# evaluation outside it stays legal but is flagged.
BAND_MIN_GHZ = 0.5
BAND_MAX_GHZ = 100.0


class ValidationError(ValueError):
    """An argument, configuration, or input file violates a contract."""


class SingularFitError(ArithmeticError):
    """A fit cannot be computed because the data is degenerate."""


class FrequencyRangeWarning(UserWarning):
    """Frequency outside the 0.5-100 GHz band the catalog models cover."""


def scalar_or_array(x):
    """Return a Python float for 0-d results, the ndarray otherwise."""
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def check_frequency_ghz(f) -> None:
    """Validate a frequency in GHz: must be positive, warns outside band."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0.0) or not np.all(np.isfinite(f)):
        raise ValidationError(f"frequency must be a positive finite value in GHz, got {f}")
    if np.any(f < BAND_MIN_GHZ) or np.any(f > BAND_MAX_GHZ):
        warnings.warn(
            f"frequency {f} GHz is outside the {BAND_MIN_GHZ}-{BAND_MAX_GHZ} GHz band "
            "the catalog parameters were derived for",
            FrequencyRangeWarning,
            stacklevel=3,
        )


def check_distance_m(d, minimum: float = 0.0, what: str = "distance") -> None:
    """Validate a 2D distance in meters against a lower bound (exclusive at 0)."""
    d = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValidationError(f"{what} must be finite, got {d}")
    if minimum > 0.0:
        if np.any(d < minimum):
            raise ValidationError(f"{what} must be >= {minimum} m, got {d}")
    elif np.any(d <= 0.0):
        raise ValidationError(f"{what} must be > 0 m, got {d}")


class ScenarioId(Enum):
    """The six deployment scenario / propagation state combinations covered
    by the built-in parameter catalog."""

    UMA_LOS = "uma-los"
    UMA_NLOS = "uma-nlos"
    UMI_STREET_CANYON_LOS = "umi-sc-los"
    UMI_STREET_CANYON_NLOS = "umi-sc-nlos"
    UMI_OPEN_SQUARE_LOS = "umi-os-los"
    UMI_OPEN_SQUARE_NLOS = "umi-os-nlos"

    @classmethod
    def from_string(cls, s: str) -> "ScenarioId":
        try:
            return cls(s.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValidationError(f"unknown scenario {s!r}; expected one of: {valid}") from None

    @property
    def is_los(self) -> bool:
        return self.value.endswith("-los") and not self.value.endswith("-nlos")

    @property
    def environment(self) -> str:
        """Environment family: 'uma', 'umi-sc', or 'umi-os'."""
        return self.value.rsplit("-", 1)[0]


@dataclass(frozen=True)
class AbgParams:
    """Floating-intercept (alpha-beta-gamma) path-loss parameters."""

    alpha: float  # distance slope, dimensionless
    beta: float  # offset, dB
    gamma: float  # frequency slope, dimensionless
    sigma_db: float  # shadow-fading std deviation, dB

    def __post_init__(self):
        if self.sigma_db <= 0.0:
            raise ValidationError(f"ABG sigma must be > 0 dB, got {self.sigma_db}")


@dataclass(frozen=True)
class D1D2Params:
    """Parameters of the two-parameter exponential LOS-probability model."""

    d1: float  # m
    d2: float  # m

    def __post_init__(self):
        if self.d1 <= 0.0 or self.d2 <= 0.0:
            raise ValidationError(f"d1 and d2 must be > 0 m, got ({self.d1}, {self.d2})")


@dataclass(frozen=True)
class ScenarioParams:
    """Full parameter bundle for one catalog scenario.

    LOS scenarios carry close-in (CI) parameters only; NLOS scenarios carry
    both CI and ABG parameters. The LOS-probability (d1, d2) pair is the
    3GPP default for the scenario's environment family.
    """

    scenario: ScenarioId
    ci_n: float  # path-loss exponent
    ci_sigma_db: float  # shadow-fading std deviation, dB
    abg: AbgParams | None  # None for LOS rows (no published parameters)
    los: D1D2Params

    def __post_init__(self):
        if self.ci_n <= 0.0:
            raise ValidationError(f"CI path-loss exponent must be > 0, got {self.ci_n}")
        if self.ci_sigma_db <= 0.0:
            raise ValidationError(f"CI sigma must be > 0 dB, got {self.ci_sigma_db}")

    @property
    def abg_available(self) -> bool:
        return self.abg is not None


# 3GPP defaults for the d1/d2 LOS-probability model, per environment family.
LOS_D1D2_UMA = D1D2Params(d1=18.0, d2=63.0)
LOS_D1D2_UMI = D1D2Params(d1=18.0, d2=36.0)

_CATALOG: dict[ScenarioId, ScenarioParams] = {
    ScenarioId.UMA_LOS: ScenarioParams(
        ScenarioId.UMA_LOS, ci_n=2.0, ci_sigma_db=4.1, abg=None, los=LOS_D1D2_UMA
    ),
    ScenarioId.UMA_NLOS: ScenarioParams(
        ScenarioId.UMA_NLOS,
        ci_n=3.0,
        ci_sigma_db=6.8,
        abg=AbgParams(alpha=3.4, beta=19.2, gamma=2.3, sigma_db=6.5),
        los=LOS_D1D2_UMA,
    ),
    ScenarioId.UMI_STREET_CANYON_LOS: ScenarioParams(
        ScenarioId.UMI_STREET_CANYON_LOS, ci_n=1.98, ci_sigma_db=3.1, abg=None, los=LOS_D1D2_UMI
    ),
    ScenarioId.UMI_STREET_CANYON_NLOS: ScenarioParams(
        ScenarioId.UMI_STREET_CANYON_NLOS,
        ci_n=3.19,
        ci_sigma_db=8.2,
        abg=AbgParams(alpha=3.48, beta=21.02, gamma=2.34, sigma_db=7.8),
        los=LOS_D1D2_UMI,
    ),
    ScenarioId.UMI_OPEN_SQUARE_LOS: ScenarioParams(
        ScenarioId.UMI_OPEN_SQUARE_LOS, ci_n=1.85, ci_sigma_db=4.2, abg=None, los=LOS_D1D2_UMI
    ),
    ScenarioId.UMI_OPEN_SQUARE_NLOS: ScenarioParams(
        ScenarioId.UMI_OPEN_SQUARE_NLOS,
        ci_n=2.89,
        ci_sigma_db=7.1,
        abg=AbgParams(alpha=4.14, beta=3.66, gamma=2.43, sigma_db=7.0),
        los=LOS_D1D2_UMI,
    ),
}


def catalog_lookup(scenario: ScenarioId | str) -> ScenarioParams:
    """Return the built-in parameter bundle for a scenario.

    Total over the six scenario ids; accepts either the enum or its
    string form (e.g. ``"umi-sc-nlos"``).
    """
    if isinstance(scenario, str):
        scenario = ScenarioId.from_string(scenario)
    return _CATALOG[scenario]


def catalog_scenarios() -> list[ScenarioId]:
    """All catalog scenario ids, in table order."""
    return list(_CATALOG.keys())


def catalog_as_dict() -> list[dict]:
    """Catalog as a JSON-serializable list of per-scenario records."""
    out = []
    for params in _CATALOG.values():
        rec = {
            "scenario": params.scenario.value,
            "ci": {"n": params.ci_n, "sigma_db": params.ci_sigma_db},
            "abg": None,
            "los": {"d1": params.los.d1, "d2": params.los.d2},
        }
        if params.abg is not None:
            rec["abg"] = {
                "alpha": params.abg.alpha,
                "beta": params.abg.beta,
                "gamma": params.abg.gamma,
                "sigma_db": params.abg.sigma_db,
            }
        out.append(rec)
    return out
