"""Deterministic Monte-Carlo link drops.

Places UEs around an AP, resolves each link's LOS state (from a building
map or a Bernoulli draw against a configured probability model), then
composes coupling loss = path loss + shadow fading + outdoor-to-indoor
loss, all in dB.

Reproducibility contract: every random purpose (placement, indoor state,
indoor depth, facade class, LOS draw, shadow fading) gets its own
generator seeded from (rng_seed, purpose index), and each purpose draws
per-link values in link order. Growing ue_count therefore never changes
the values drawn for earlier links, and reruns with the same config and
seed are bit-identical regardless of platform parallelism.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ScenarioId,
    ScenarioParams,
    ValidationError,
    catalog_lookup,
    check_frequency_ghz,
)
from .geometry import BuildingMap, indoor_polygon_index, is_los, outer_wall_distance
from .los import p_los_3gpp_uma, p_los_d1d2, p_los_nyu_squared
from .pathloss import _fspl_1m
from .penetration import BplClass, O2iConfig, bpl

LOS_MODES = ("stochastic", "map")
LOS_MODELS = ("d1d2", "nyu-squared", "3gpp-uma")
PL_MODELS = ("ci", "abg")
SF_MODES = ("iid", "exp-correlated")

# substream purposes, mixed into the seed as (rng_seed, purpose)
_PURPOSE_PLACEMENT = 0
_PURPOSE_INDOOR = 1
_PURPOSE_DEPTH = 2
_PURPOSE_BPL_CLASS = 3
_PURPOSE_LOS = 4
_PURPOSE_SF = 5

# CI/CIF models are anchored at 1 m; closer placements evaluate there.
MIN_EVAL_DISTANCE_M = 1.0


@dataclass(frozen=True)
class DropConfig:
    """Validated drop-simulation configuration.

    Construction performs all validation, so a DropConfig in hand is
    runnable; nothing is sampled until run_drop.
    """

    scenario_los: ScenarioId | str
    scenario_nlos: ScenarioId | str
    f_ghz: float
    ue_count: int | None = None
    ue_positions: tuple | None = None
    ap_position: tuple = (0.0, 0.0)
    placement_radius_m: float = 200.0
    los_mode: str = "stochastic"
    los_model: str = "d1d2"
    ue_height_m: float = 1.5
    indoor_fraction: float = 0.0
    high_loss_fraction: float = 0.5
    max_indoor_depth_m: float = 25.0
    o2i: O2iConfig = field(default_factory=O2iConfig)
    pl_model: str = "ci"
    sf_mode: str = "iid"
    sf_decorrelation_m: float | None = None
    rng_seed: int | None = None

    def __post_init__(self):
        s_los = ScenarioId.from_string(self.scenario_los) if isinstance(
            self.scenario_los, str
        ) else self.scenario_los
        s_nlos = ScenarioId.from_string(self.scenario_nlos) if isinstance(
            self.scenario_nlos, str
        ) else self.scenario_nlos
        if not s_los.is_los:
            raise ValidationError(f"scenario_los must be a LOS scenario, got {s_los.value}")
        if s_nlos.is_los:
            raise ValidationError(f"scenario_nlos must be an NLOS scenario, got {s_nlos.value}")
        if s_los.environment != s_nlos.environment:
            raise ValidationError(
                "scenario pair must share one environment family, got "
                f"{s_los.value} / {s_nlos.value}"
            )
        object.__setattr__(self, "scenario_los", s_los)
        object.__setattr__(self, "scenario_nlos", s_nlos)
        check_frequency_ghz(self.f_ghz)

        if self.ue_positions is not None:
            positions = tuple((float(x), float(y)) for x, y in self.ue_positions)
            if not positions:
                raise ValidationError("ue_positions must not be empty")
            if self.ue_count is not None and self.ue_count != len(positions):
                raise ValidationError(
                    f"ue_count {self.ue_count} contradicts the {len(positions)} "
                    "explicit ue_positions"
                )
            object.__setattr__(self, "ue_positions", positions)
            object.__setattr__(self, "ue_count", len(positions))
        else:
            if self.ue_count is None or self.ue_count < 1:
                raise ValidationError(f"ue_count must be >= 1, got {self.ue_count}")
            if not self.placement_radius_m > 0.0:
                raise ValidationError(
                    f"placement_radius_m must be > 0, got {self.placement_radius_m}"
                )
        ap = tuple(float(v) for v in self.ap_position)
        if len(ap) != 2 or not all(math.isfinite(v) for v in ap):
            raise ValidationError(f"ap_position must be a finite (x, y) pair, got {ap}")
        object.__setattr__(self, "ap_position", ap)

        if self.los_mode not in LOS_MODES:
            raise ValidationError(f"los_mode must be one of {LOS_MODES}, got {self.los_mode!r}")
        if self.los_model not in LOS_MODELS:
            raise ValidationError(f"los_model must be one of {LOS_MODELS}, got {self.los_model!r}")
        if self.los_model == "3gpp-uma":
            if s_los.environment != "uma":
                raise ValidationError("los_model '3gpp-uma' requires UMa scenarios")
            if self.ue_height_m > 23.0:
                raise ValidationError(
                    f"ue_height_m {self.ue_height_m} exceeds the 23 m model ceiling"
                )
        if not 0.0 < self.ue_height_m:
            raise ValidationError(f"ue_height_m must be > 0, got {self.ue_height_m}")
        for name in ("indoor_fraction", "high_loss_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")
        if not self.max_indoor_depth_m > 0.0:
            raise ValidationError(
                f"max_indoor_depth_m must be > 0, got {self.max_indoor_depth_m}"
            )
        if isinstance(self.o2i, dict):
            object.__setattr__(self, "o2i", O2iConfig(**self.o2i))
        elif not isinstance(self.o2i, O2iConfig):
            raise ValidationError("o2i must be an O2iConfig or a dict of its fields")
        if self.pl_model not in PL_MODELS:
            raise ValidationError(f"pl_model must be one of {PL_MODELS}, got {self.pl_model!r}")
        if self.sf_mode not in SF_MODES:
            raise ValidationError(f"sf_mode must be one of {SF_MODES}, got {self.sf_mode!r}")
        if self.sf_mode == "exp-correlated":
            if self.sf_decorrelation_m is None or not self.sf_decorrelation_m > 0.0:
                raise ValidationError(
                    "sf_decorrelation_m must be > 0 when sf_mode is exp-correlated, "
                    f"got {self.sf_decorrelation_m}"
                )
        if self.rng_seed is not None and not isinstance(self.rng_seed, (int, np.integer)):
            raise ValidationError(f"rng_seed must be an integer, got {self.rng_seed!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "DropConfig":
        if not isinstance(d, dict):
            raise ValidationError("drop config must be a JSON object")
        import dataclasses

        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown drop-config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "scenario_los": self.scenario_los.value,
            "scenario_nlos": self.scenario_nlos.value,
            "f_ghz": self.f_ghz,
            "ue_count": self.ue_count,
            "ue_positions": None
            if self.ue_positions is None
            else [list(p) for p in self.ue_positions],
            "ap_position": list(self.ap_position),
            "placement_radius_m": self.placement_radius_m,
            "los_mode": self.los_mode,
            "los_model": self.los_model,
            "ue_height_m": self.ue_height_m,
            "indoor_fraction": self.indoor_fraction,
            "high_loss_fraction": self.high_loss_fraction,
            "max_indoor_depth_m": self.max_indoor_depth_m,
            "o2i": {
                "incidence_surcharge_max_db": self.o2i.incidence_surcharge_max_db,
                "depth_loss_per_m": self.o2i.depth_loss_per_m,
            },
            "pl_model": self.pl_model,
            "sf_mode": self.sf_mode,
            "sf_decorrelation_m": self.sf_decorrelation_m,
            "rng_seed": self.rng_seed,
        }

    def config_hash(self) -> str:
        """sha256 over the canonical config JSON, seed excluded.

        The hash identifies the configuration; the seed travels alongside
        it in every output file.
        """
        payload = self.to_dict()
        payload.pop("rng_seed")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class DropResult:
    """Per-link simulation record plus the provenance needed to reproduce it."""

    config: DropConfig
    seed: int
    config_hash: str
    ue_xy: np.ndarray
    d2d_m: np.ndarray
    indoor: np.ndarray
    los: np.ndarray
    depth_m: np.ndarray
    d_los_m: np.ndarray  # distance the LOS model saw (outer wall for indoor UEs)
    pl_db: np.ndarray
    sf_db: np.ndarray
    o2i_db: np.ndarray
    coupling_loss_db: np.ndarray

    @property
    def n_links(self) -> int:
        return len(self.d2d_m)

    def los_fraction_by_bin(self, bin_width_m: float = 10.0):
        """(bin_center, los_fraction, count) rows over 2D-distance bins."""
        if bin_width_m <= 0.0:
            raise ValidationError(f"bin width must be > 0 m, got {bin_width_m}")
        idx = np.floor(self.d2d_m / bin_width_m).astype(int)
        counts = np.bincount(idx)
        hits = np.bincount(idx, weights=self.los.astype(float))
        occupied = np.flatnonzero(counts)
        return [
            (float((i + 0.5) * bin_width_m), float(hits[i] / counts[i]), int(counts[i]))
            for i in occupied
        ]

    def summary_dict(self, percentiles=(5.0, 25.0, 50.0, 75.0, 95.0)) -> dict:
        return {
            "seed": self.seed,
            "config_hash": self.config_hash,
            "n_links": self.n_links,
            "los_fraction": float(np.mean(self.los)),
            "indoor_fraction_observed": float(np.mean(self.indoor)),
            "sf_std_db": float(np.std(self.sf_db)),
            "coupling_loss_db_percentiles": {
                f"p{p:g}": v for p, v in coupling_loss_cdf(self, percentiles)
            },
            "los_fraction_by_distance": [
                {"center_m": c, "p_los": p, "count": n}
                for c, p, n in self.los_fraction_by_bin()
            ],
            "config": self.config.to_dict(),
        }

    def to_csv_text(self) -> str:
        """Per-link CSV text; `#` comment lines carry the seed and config hash."""
        import io

        fh = io.StringIO()
        fh.write(f"# seed={self.seed}\n")
        fh.write(f"# config_hash={self.config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(
                [
                    "link",
                    "ue_x_m",
                    "ue_y_m",
                    "d2d_m",
                    "indoor",
                    "los",
                    "depth_m",
                    "pl_db",
                    "sf_db",
                    "o2i_db",
                    "coupling_loss_db",
                ]
            )
        for i in range(self.n_links):
            writer.writerow(
                [
                    i,
                    repr(float(self.ue_xy[i, 0])),
                    repr(float(self.ue_xy[i, 1])),
                    repr(float(self.d2d_m[i])),
                    int(self.indoor[i]),
                    int(self.los[i]),
                    repr(float(self.depth_m[i])),
                    repr(float(self.pl_db[i])),
                    repr(float(self.sf_db[i])),
                    repr(float(self.o2i_db[i])),
                    repr(float(self.coupling_loss_db[i])),
                ]
            )
        return fh.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())


def _stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng([seed, purpose])


def _los_probability(cfg: DropConfig, params: ScenarioParams, d: np.ndarray) -> np.ndarray:
    if cfg.los_model == "d1d2":
        return np.asarray(p_los_d1d2(params.los, d))
    if cfg.los_model == "nyu-squared":
        return np.asarray(p_los_nyu_squared(params.los, d))
    return np.asarray(p_los_3gpp_uma(d, cfg.ue_height_m))


def run_drop(cfg: DropConfig, building_map: BuildingMap | None = None) -> DropResult:
    """Run one deterministic drop.

    A building map is required in map mode and rejected in stochastic
    mode. The seed must be resolved (an int) before running; the CLI
    generates and prints one when it is absent.
    """
    if cfg.los_mode == "map" and building_map is None:
        raise ValidationError("los_mode 'map' requires a building map")
    if cfg.los_mode != "map" and building_map is not None:
        raise ValidationError("a building map was supplied but los_mode is not 'map'")
    if cfg.rng_seed is None:
        raise ValidationError("rng_seed is unset; resolve a seed before running")
    seed = int(cfg.rng_seed)
    n = cfg.ue_count
    ap = np.asarray(cfg.ap_position, dtype=float)

    if cfg.ue_positions is not None:
        ue = np.asarray(cfg.ue_positions, dtype=float)
    else:
        u = _stream(seed, _PURPOSE_PLACEMENT).random((n, 2))
        r = cfg.placement_radius_m * np.sqrt(u[:, 0])
        phi = 2.0 * np.pi * u[:, 1]
        ue = ap + np.column_stack((r * np.cos(phi), r * np.sin(phi)))
    d2d = np.hypot(ue[:, 0] - ap[0], ue[:, 1] - ap[1])

    # indoor state, depth, and the LOS-model distance
    depth = np.zeros(n)
    d_los = d2d.copy()
    u_indoor = _stream(seed, _PURPOSE_INDOOR).random(n)
    u_depth = _stream(seed, _PURPOSE_DEPTH).random(n)
    if cfg.los_mode == "map":
        indoor = np.zeros(n, dtype=bool)
        for i in range(n):
            if indoor_polygon_index(building_map, ue[i]) is not None:
                indoor[i] = True
                wall = outer_wall_distance(building_map, ap, ue[i])
                depth[i] = wall.depth_m
                d_los[i] = max(wall.wall_m, 1e-9)
    else:
        indoor = u_indoor < cfg.indoor_fraction
        depth = np.where(indoor, u_depth * cfg.max_indoor_depth_m, 0.0)
        d_los = np.where(indoor, np.maximum(d2d - depth, MIN_EVAL_DISTANCE_M), d2d)

    # LOS state
    p_los = None
    if cfg.los_mode == "map":
        los = np.array([is_los(building_map, ap, ue[i]) for i in range(n)], dtype=bool)
    else:
        params_los = catalog_lookup(cfg.scenario_los)
        p_los = _los_probability(cfg, params_los, np.maximum(d_los, 1e-9))
        los = _stream(seed, _PURPOSE_LOS).random(n) < p_los

    # mean path loss
    s_los = catalog_lookup(cfg.scenario_los)
    s_nlos = catalog_lookup(cfg.scenario_nlos)
    d_eval = np.maximum(d2d, MIN_EVAL_DISTANCE_M)
    fspl = _fspl_1m(cfg.f_ghz)
    pl_ci_los = fspl + 10.0 * s_los.ci_n * np.log10(d_eval)
    if cfg.pl_model == "abg":
        abg = s_nlos.abg
        pl_nlos = (
            10.0 * abg.alpha * np.log10(d_eval)
            + abg.beta
            + 10.0 * abg.gamma * np.log10(cfg.f_ghz)
        )
        sigma_nlos = abg.sigma_db
    else:
        pl_nlos = fspl + 10.0 * s_nlos.ci_n * np.log10(d_eval)
        sigma_nlos = s_nlos.ci_sigma_db
    pl = np.where(los, pl_ci_los, pl_nlos)
    sigma = np.where(los, s_los.ci_sigma_db, sigma_nlos)

    # shadow fading
    z = _stream(seed, _PURPOSE_SF).standard_normal(n)
    if cfg.sf_mode == "iid":
        sf = sigma * z
    else:
        y = np.empty(n)
        y[0] = z[0]
        steps = np.hypot(np.diff(ue[:, 0]), np.diff(ue[:, 1]))
        rho = np.exp(-steps / cfg.sf_decorrelation_m)
        for i in range(1, n):
            y[i] = rho[i - 1] * y[i - 1] + math.sqrt(1.0 - rho[i - 1] ** 2) * z[i]
        sf = sigma * y

    # outdoor-to-indoor loss (normal incidence; depth term only beyond the facade)
    high = _stream(seed, _PURPOSE_BPL_CLASS).random(n) < cfg.high_loss_fraction
    bpl_low = float(bpl(BplClass.LOW_LOSS, cfg.f_ghz))
    bpl_high = float(bpl(BplClass.HIGH_LOSS, cfg.f_ghz))
    o2i = np.where(
        indoor,
        np.where(high, bpl_high, bpl_low) + cfg.o2i.depth_loss_per_m * depth,
        0.0,
    )

    return DropResult(
        config=cfg,
        seed=seed,
        config_hash=cfg.config_hash(),
        ue_xy=ue,
        d2d_m=d2d,
        indoor=indoor,
        los=los,
        depth_m=depth,
        d_los_m=d_los,
        pl_db=pl,
        sf_db=sf,
        o2i_db=o2i,
        coupling_loss_db=pl + sf + o2i,
    )


def coupling_loss_cdf(result: DropResult, percentiles):
    """Empirical coupling-loss percentiles as (percentile, dB) rows."""
    if result.n_links == 0:
        raise ValidationError("empty drop result")
    pts = [float(p) for p in percentiles]
    if not pts:
        raise ValidationError("need at least one percentile")
    for p in pts:
        if not 0.0 <= p <= 100.0:
            raise ValidationError(f"percentiles must be in [0, 100], got {p}")
    values = np.percentile(result.coupling_loss_db, pts)
    return [(p, float(v)) for p, v in zip(pts, values)]
