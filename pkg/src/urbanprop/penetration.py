"""Outdoor-to-indoor loss: facade penetration, incidence surcharge, depth loss.

The facade term is a parabolic-in-frequency fit 10 log10(A + B f^2) with two
building classes (low loss: A=5, B=0.03; high loss: A=10, B=5, f in GHz).
Two add-ons complete the O2I composition:

* a grazing-incidence surcharge, 0 dB at normal incidence rising to a
  configurable maximum (default 20 dB) as the angle approaches 90 deg — the
  (1 - cos theta) shape is a modeling choice, only the magnitude range is
  measurement-backed;
* a linear indoor depth loss at a configurable rate (default 0.5 dB/m,
  valid range 0.2-2 dB/m).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import ValidationError, check_frequency_ghz, scalar_or_array


class BplClass(Enum):
    """Facade class: (A, B) coefficients of 10 log10(A + B f^2)."""

    LOW_LOSS = ("low", 5.0, 0.03)
    HIGH_LOSS = ("high", 10.0, 5.0)

    def __init__(self, label: str, a: float, b: float):
        self.label = label
        self.a = a
        self.b = b

    @classmethod
    def from_string(cls, s: str) -> "BplClass":
        for member in cls:
            if s.strip().lower() in (member.label, member.name.lower()):
                return member
        raise ValidationError(f"unknown building class {s!r}; expected 'low' or 'high'")


@dataclass(frozen=True)
class O2iConfig:
    """Tunable O2I add-on terms.

    incidence_surcharge_max_db: extra loss at fully grazing incidence, dB
    (0-20). depth_loss_per_m: indoor loss rate, dB per meter (0.2-2).
    """

    incidence_surcharge_max_db: float = 20.0
    depth_loss_per_m: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.incidence_surcharge_max_db <= 20.0:
            raise ValidationError(
                "incidence_surcharge_max_db must be in [0, 20], "
                f"got {self.incidence_surcharge_max_db}"
            )
        if not 0.2 <= self.depth_loss_per_m <= 2.0:
            raise ValidationError(
                f"depth_loss_per_m must be in [0.2, 2.0] dB/m, got {self.depth_loss_per_m}"
            )


def bpl(building_class: BplClass, f_ghz):
    """Building penetration loss through the facade, in dB."""
    check_frequency_ghz(f_ghz)
    f = np.asarray(f_ghz, dtype=float)
    return scalar_or_array(10.0 * np.log10(building_class.a + building_class.b * f * f))


def o2i_loss(building_class: BplClass, f_ghz, depth_m, incidence_deg, cfg: O2iConfig = O2iConfig()):
    """Total outdoor-to-indoor loss, in dB.

    bpl(f) + surcharge_max * (1 - cos(incidence)) + rate * depth.

    Parameters
    ----------
    depth_m : float or array_like
        Indoor distance beyond the outer wall, meters (>= 0).
    incidence_deg : float or array_like
        Incidence angle measured from the wall normal, degrees in [0, 90).
    """
    depth = np.asarray(depth_m, dtype=float)
    angle = np.asarray(incidence_deg, dtype=float)
    if np.any(depth < 0.0) or not np.all(np.isfinite(depth)):
        raise ValidationError(f"indoor depth must be >= 0 m, got {depth}")
    if np.any(angle < 0.0) or np.any(angle >= 90.0) or not np.all(np.isfinite(angle)):
        raise ValidationError(f"incidence angle must be in [0, 90) degrees, got {angle}")
    base = np.asarray(bpl(building_class, f_ghz))
    surcharge = cfg.incidence_surcharge_max_db * (1.0 - np.cos(np.radians(angle)))
    return scalar_or_array(base + surcharge + cfg.depth_loss_per_m * depth)
