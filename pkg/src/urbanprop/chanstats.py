"""Large-scale channel statistics over ray sets.

RMS delay spread is the power-weighted second central moment of the ray
delays. Angle spreads use a circular estimator: the weighted variance is
minimized over every distinct placement of the 360-degree wrap cut, which
makes the result invariant to rotating all angles. XPR aggregation is done
in the dB domain (mean/std of the per-ray dB figures), not on linear
ratios — the two differ, so the convention matters when comparing numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ValidationError

ANGLE_FIELDS = ("aod_az", "aoa_az", "aod_el", "aoa_el")


def _weights(rays) -> np.ndarray:
    if len(rays) == 0:
        raise ValidationError("need at least one ray")
    p = np.array([r.power for r in rays], dtype=float)
    total = p.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValidationError(f"total ray power must be > 0, got {total}")
    return p / total


def rms_delay_spread(rays) -> float:
    """Power-weighted RMS delay spread in ns: sqrt(E[tau^2] - E[tau]^2)."""
    w = _weights(rays)
    tau = np.array([r.delay_ns for r in rays], dtype=float)
    mean = float(np.dot(w, tau))
    # shifted form avoids cancellation when delays are large and tight
    var = float(np.dot(w, np.square(tau - mean)))
    return math.sqrt(max(var, 0.0))


def _circular_spread(theta_deg: np.ndarray, w: np.ndarray) -> float:
    """Minimum weighted std over all wrap-cut placements, degrees.

    The variance is constant while the cut moves between two data angles,
    so evaluating one cut at each distinct angle covers every case exactly.
    """
    # rows: one candidate cut per ray angle; columns: shifted angles
    shifted = np.mod(theta_deg[None, :] - theta_deg[:, None], 360.0)
    means = shifted @ w
    second = np.square(shifted) @ w
    variances = second - np.square(means)
    return math.sqrt(max(float(np.min(variances)), 0.0))


def rms_angle_spread(rays, which: str) -> float:
    """Circular power-weighted RMS angle spread, degrees.

    which selects the angle: 'aod_az', 'aoa_az', 'aod_el' or 'aoa_el'.
    Bounded above by 180 (attained only by pathological two-point sets);
    elevation angles never span the wrap, so for them this reduces to the
    plain weighted standard deviation.
    """
    if which not in ANGLE_FIELDS:
        raise ValidationError(f"unknown angle field {which!r}; expected one of {ANGLE_FIELDS}")
    w = _weights(rays)
    theta = np.array([getattr(r, which + "_deg") for r in rays], dtype=float)
    return _circular_spread(theta, w)


def xpr_stats(rays):
    """(mean, population std) of per-ray XPR in dB, or None if no ray has XPR."""
    vals = np.array([r.xpr_db for r in rays if r.xpr_db is not None], dtype=float)
    if len(vals) == 0:
        return None
    return float(np.mean(vals)), float(np.std(vals))


@dataclass(frozen=True)
class SpreadReport:
    """Summary statistics for one ray set (a whole link or one cluster)."""

    n_rays: int
    total_power: float
    rms_delay_spread_ns: float
    asd_az_deg: float  # azimuth spread of departure
    asa_az_deg: float  # azimuth spread of arrival
    asd_el_deg: float  # elevation spread of departure
    asa_el_deg: float  # elevation spread of arrival
    xpr_mean_db: float | None
    xpr_std_db: float | None

    def to_dict(self) -> dict:
        return {
            "n_rays": self.n_rays,
            "total_power": self.total_power,
            "rms_delay_spread_ns": self.rms_delay_spread_ns,
            "asd_az_deg": self.asd_az_deg,
            "asa_az_deg": self.asa_az_deg,
            "asd_el_deg": self.asd_el_deg,
            "asa_el_deg": self.asa_el_deg,
            "xpr_mean_db": self.xpr_mean_db,
            "xpr_std_db": self.xpr_std_db,
        }


def spread_report(rays) -> SpreadReport:
    """Compute the full SpreadReport for a ray set."""
    rays = tuple(rays)
    xpr = xpr_stats(rays)
    return SpreadReport(
        n_rays=len(rays),
        total_power=float(sum(r.power for r in rays)),
        rms_delay_spread_ns=rms_delay_spread(rays),
        asd_az_deg=rms_angle_spread(rays, "aod_az"),
        asa_az_deg=rms_angle_spread(rays, "aoa_az"),
        asd_el_deg=rms_angle_spread(rays, "aod_el"),
        asa_el_deg=rms_angle_spread(rays, "aoa_el"),
        xpr_mean_db=None if xpr is None else xpr[0],
        xpr_std_db=None if xpr is None else xpr[1],
    )


def per_cluster_reports(cluster_set) -> dict:
    """SpreadReport per cluster over its retained (unpruned) rays."""
    reports = {}
    for j in sorted(np.unique(cluster_set.assignments[~cluster_set.pruned])):
        members = cluster_set.cluster_members(int(j))
        reports[int(j)] = spread_report(tuple(cluster_set.rays[i] for i in members))
    return reports
