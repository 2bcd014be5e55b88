"""Least-squares estimation of path-loss and LOS-probability model parameters.

Path-loss fitters consume pooled multi-frequency (f, d, PL, weight)
samples and minimize the weighted sum of squared dB residuals; all three
model families admit closed forms (CI: one parameter; CIF: 2x2 normal
equations with the centroid frequency fixed from the data; ABG: ordinary
least squares on three regressors). The reported shadow-fading sigma is
the square root of the weighted mean squared residual — population
convention, no mean subtraction — so adding a parameter can never
increase it.

LOS-probability fitting bins the samples by distance, forms empirical LOS
fractions, and grid-searches integer-meter (d1, d2) for minimum MSE
against the model curve at the bin centers.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import D1D2Params, SingularFitError, ValidationError
from .los import p_los_d1d2, p_los_nyu_squared
from .pathloss import ABG_MIN_DISTANCE_M, _fspl_1m

# Integer-meter grids for the (d1, d2) exhaustive search.
D1_GRID_M = np.arange(1.0, 101.0)
D2_GRID_M = np.arange(1.0, 301.0)

LOS_MODEL_NAMES = ("d1d2", "nyu_squared")


class SingleFrequencyWarning(UserWarning):
    """CIF requested on single-frequency data; reverted to CI with b = 0."""


@dataclass(frozen=True)
class PathLossSample:
    """One (frequency, distance, path loss) observation with a pooling weight."""

    f_ghz: float
    d_m: float
    pl_db: float
    los: bool = False
    weight: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.f_ghz) or self.f_ghz <= 0.0:
            raise ValidationError(f"sample frequency must be > 0 GHz, got {self.f_ghz}")
        if not np.isfinite(self.d_m) or self.d_m <= 0.0:
            raise ValidationError(f"sample distance must be > 0 m, got {self.d_m}")
        if not np.isfinite(self.pl_db):
            raise ValidationError(f"sample path loss must be finite, got {self.pl_db}")
        if not np.isfinite(self.weight) or self.weight <= 0.0:
            raise ValidationError(f"sample weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class LosSample:
    d_m: float
    los: bool

    def __post_init__(self):
        if not np.isfinite(self.d_m) or self.d_m <= 0.0:
            raise ValidationError(f"sample distance must be > 0 m, got {self.d_m}")


@dataclass
class FitReport:
    """Fitted parameters plus residual statistics for one model family."""

    model: str
    params: dict
    sf_sigma_db: float
    sample_count: int
    mse_db2: float
    rmse_db: float
    notes: tuple = ()
    residuals_db: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "sf_sigma_db": self.sf_sigma_db,
            "sample_count": self.sample_count,
            "mse_db2": self.mse_db2,
            "rmse_db": self.rmse_db,
            "notes": list(self.notes),
        }


def _sample_arrays(samples, min_d: float, model_name: str):
    if len(samples) < 2:
        raise ValidationError(f"{model_name} fit needs at least 2 samples, got {len(samples)}")
    f = np.array([s.f_ghz for s in samples])
    d = np.array([s.d_m for s in samples])
    pl = np.array([s.pl_db for s in samples])
    w = np.array([s.weight for s in samples])
    if np.any(d < min_d):
        raise ValidationError(
            f"{model_name} fit requires all distances >= {min_d} m, got minimum {d.min()}"
        )
    return f, d, pl, w


def _residual_stats(residuals: np.ndarray, weights: np.ndarray):
    mse = float(np.dot(weights, np.square(residuals)) / weights.sum())
    rmse = float(np.sqrt(mse))
    return mse, rmse


def fit_ci(samples) -> FitReport:
    """Fit the close-in model's single path-loss exponent.

    Closed form: n = sum(w a b) / sum(w b^2) with a = pl - fspl_1m(f) and
    b = 10 log10(d). Data entirely at the 1 m anchor leaves n
    unidentifiable and raises SingularFitError.
    """
    f, d, pl, w = _sample_arrays(samples, 1.0, "CI")
    a = pl - _fspl_1m(f)
    b = 10.0 * np.log10(d)
    denom = float(np.dot(w, b * b))
    if denom <= 1e-12:
        raise SingularFitError(
            "path-loss exponent unidentifiable: all samples at the 1 m reference distance"
        )
    n = float(np.dot(w, a * b) / denom)
    residuals = a - n * b
    mse, rmse = _residual_stats(residuals, w)
    return FitReport(
        model="ci",
        params={"n": n},
        sf_sigma_db=rmse,
        sample_count=len(samples),
        mse_db2=mse,
        rmse_db=rmse,
        residuals_db=residuals,
    )


def fit_cif(samples) -> FitReport:
    """Fit (n, b) of the CIF model with f0 fixed at the data's centroid frequency.

    Linear in theta = (n, n*b): regressors are b_i and b_i * x_i with
    x_i = (f_i - f0) / f0. Single-frequency data cannot identify b; the
    fit then reverts to CI with b = 0 and warns.
    """
    f, d, pl, w = _sample_arrays(samples, 1.0, "CIF")
    f0 = float(np.dot(w, f) / w.sum())
    if len(np.unique(f)) < 2:
        warnings.warn(
            "single-frequency data: CIF reverts to CI with b = 0",
            SingleFrequencyWarning,
            stacklevel=2,
        )
        ci = fit_ci(samples)
        return FitReport(
            model="cif",
            params={"n": ci.params["n"], "b": 0.0, "f0_ghz": f0},
            sf_sigma_db=ci.sf_sigma_db,
            sample_count=ci.sample_count,
            mse_db2=ci.mse_db2,
            rmse_db=ci.rmse_db,
            notes=("single-frequency data: b fixed to 0",),
            residuals_db=ci.residuals_db,
        )
    a = pl - _fspl_1m(f)
    b = 10.0 * np.log10(d)
    x = (f - f0) / f0
    c1, c2 = b, b * x
    gram = np.array(
        [
            [np.dot(w, c1 * c1), np.dot(w, c1 * c2)],
            [np.dot(w, c1 * c2), np.dot(w, c2 * c2)],
        ]
    )
    rhs = np.array([np.dot(w, a * c1), np.dot(w, a * c2)])
    det = float(np.linalg.det(gram))
    scale = float(np.trace(gram))
    if abs(det) <= 1e-12 * max(scale * scale, 1.0):
        raise SingularFitError(
            "CIF normal equations are singular: distances or frequencies carry no spread"
        )
    theta = np.linalg.solve(gram, rhs)
    n = float(theta[0])
    if abs(n) <= 1e-12:
        raise SingularFitError("fitted path-loss exponent is zero; b is unidentifiable")
    b_slope = float(theta[1] / theta[0])
    residuals = a - theta[0] * c1 - theta[1] * c2
    mse, rmse = _residual_stats(residuals, w)
    return FitReport(
        model="cif",
        params={"n": n, "b": b_slope, "f0_ghz": f0},
        sf_sigma_db=rmse,
        sample_count=len(samples),
        mse_db2=mse,
        rmse_db=rmse,
        residuals_db=residuals,
    )


def fit_abg(samples) -> FitReport:
    """Ordinary least squares for (alpha, beta, gamma).

    Regressors: 10 log10(d), 1, 10 log10(f_GHz). The design must span two
    distances and two frequencies and not collapse onto a lower-dimensional
    subspace; rank deficiencies raise SingularFitError naming the
    unidentifiable direction.
    """
    if len(samples) < 3:
        raise ValidationError(f"ABG fit needs at least 3 samples, got {len(samples)}")
    f, d, pl, w = _sample_arrays(samples, ABG_MIN_DISTANCE_M, "ABG")
    if len(np.unique(d)) < 2:
        raise SingularFitError("distance slope alpha unidentifiable: all samples at one distance")
    if len(np.unique(f)) < 2:
        raise SingularFitError(
            "frequency slope gamma unidentifiable: all samples at one frequency"
        )
    design = np.column_stack((10.0 * np.log10(d), np.ones_like(d), 10.0 * np.log10(f)))
    sw = np.sqrt(w)
    dw = design * sw[:, None]
    yw = pl * sw
    theta, _, rank, sv = np.linalg.lstsq(dw, yw, rcond=None)
    if rank < 3:
        # name the direction the data cannot resolve
        _, _, vt = np.linalg.svd(dw, full_matrices=False)
        null = vt[-1]
        terms = ("alpha", "beta", "gamma")
        dominant = terms[int(np.argmax(np.abs(null)))]
        raise SingularFitError(
            f"ABG design is rank-deficient (rank {rank} of 3); "
            f"unidentifiable combination is dominated by {dominant} "
            f"(null direction alpha={null[0]:.3f}, beta={null[1]:.3f}, gamma={null[2]:.3f})"
        )
    alpha, beta, gamma = (float(v) for v in theta)
    residuals = pl - design @ theta
    mse, rmse = _residual_stats(residuals, w)
    return FitReport(
        model="abg",
        params={"alpha": alpha, "beta": beta, "gamma": gamma},
        sf_sigma_db=rmse,
        sample_count=len(samples),
        mse_db2=mse,
        rmse_db=rmse,
        residuals_db=residuals,
    )


# ---------------------------------------------------------------------------
# LOS-probability fitting
# ---------------------------------------------------------------------------


@dataclass
class LosFitReport:
    """Grid-search result for one LOS-probability model."""

    model: str
    params: D1D2Params
    mse: float
    bin_width_m: float
    bin_centers_m: np.ndarray = field(repr=False)
    p_hat: np.ndarray = field(repr=False)
    bin_counts: np.ndarray = field(repr=False)
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "d1": self.params.d1,
            "d2": self.params.d2,
            "mse": self.mse,
            "bin_width_m": self.bin_width_m,
            "bins": [
                {"center_m": float(c), "p_los": float(p), "count": int(n)}
                for c, p, n in zip(self.bin_centers_m, self.p_hat, self.bin_counts)
            ],
            "degenerate": self.degenerate,
        }


def _bin_los_samples(samples, bin_width_m: float):
    if bin_width_m <= 0.0:
        raise ValidationError(f"bin width must be > 0 m, got {bin_width_m}")
    d = np.array([s.d_m for s in samples])
    los = np.array([1.0 if s.los else 0.0 for s in samples])
    idx = np.floor(d / bin_width_m).astype(int)
    counts = np.bincount(idx)
    hits = np.bincount(idx, weights=los)
    occupied = np.flatnonzero(counts)
    if len(occupied) < 2:
        raise ValidationError(
            f"LOS fitting needs samples in at least 2 distance bins, got {len(occupied)}"
        )
    centers = (occupied + 0.5) * bin_width_m
    p_hat = hits[occupied] / counts[occupied]
    return centers, p_hat, counts[occupied]


def _d1d2_curve(d1, d2, d):
    e = np.exp(-d / d2)
    return np.where(d <= d1, 1.0, np.minimum(d1 / d, 1.0) * (1.0 - e) + e)


def _grid_mse(centers, p_hat, squared: bool) -> np.ndarray:
    mse = np.empty((len(D1_GRID_M), len(D2_GRID_M)))
    d = centers[None, :]
    for i, d1 in enumerate(D1_GRID_M):
        p = _d1d2_curve(d1, D2_GRID_M[:, None], d)
        if squared:
            p = p * p
        mse[i] = np.mean(np.square(p - p_hat[None, :]), axis=1)
    return mse


def fit_los_probability(samples, model: str = "d1d2", bin_width_m: float = 10.0) -> LosFitReport:
    """Exhaustive integer-meter (d1, d2) search against binned LOS fractions.

    Samples are grouped into bin_width_m distance bins; the model is
    evaluated at the occupied bin centers and scored by unweighted MSE
    against the empirical LOS fraction. Ties prefer smaller d1, then
    smaller d2. When every bin is all-LOS, d1 pegs to the grid maximum and
    the report is flagged degenerate.
    """
    if model not in LOS_MODEL_NAMES:
        raise ValidationError(f"unknown LOS model {model!r}; expected one of {LOS_MODEL_NAMES}")
    centers, p_hat, counts = _bin_los_samples(samples, bin_width_m)
    mse = _grid_mse(centers, p_hat, squared=(model == "nyu_squared"))
    flat = int(np.argmin(mse))  # row-major: ties resolve to smaller d1, then d2
    i, j = divmod(flat, mse.shape[1])
    params = D1D2Params(d1=float(D1_GRID_M[i]), d2=float(D2_GRID_M[j]))
    return LosFitReport(
        model=model,
        params=params,
        mse=float(mse[i, j]),
        bin_width_m=bin_width_m,
        bin_centers_m=centers,
        p_hat=p_hat,
        bin_counts=counts,
        degenerate=bool(params.d1 >= D1_GRID_M[-1]),
    )


def compare_los_models(samples, bin_width_m: float = 10.0, environment: str = "uma"):
    """Three-row model comparison: fixed defaults vs. the two fitted models.

    The defaults row evaluates the standard (d1, d2) pair for the
    environment family — (18, 63) for UMa, (18, 36) for UMi — without
    fitting; the other rows carry the grid-search optima. Rows are dicts
    with keys model / d1 / d2 / mse.
    """
    environment = environment.strip().lower()
    defaults = {"uma": D1D2Params(18.0, 63.0), "umi": D1D2Params(18.0, 36.0)}
    if environment not in defaults:
        raise ValidationError(f"unknown environment {environment!r}; expected 'uma' or 'umi'")
    base = defaults[environment]
    centers, p_hat, _ = _bin_los_samples(samples, bin_width_m)
    default_mse = float(np.mean(np.square(np.asarray(p_los_d1d2(base, centers)) - p_hat)))
    rows = [
        {"model": f"3gpp-{environment}", "d1": base.d1, "d2": base.d2, "mse": default_mse}
    ]
    for model in LOS_MODEL_NAMES:
        fit = fit_los_probability(samples, model=model, bin_width_m=bin_width_m)
        rows.append(
            {
                "model": fit.model.replace("_", "-"),
                "d1": fit.params.d1,
                "d2": fit.params.d2,
                "mse": fit.mse,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _parse_los_flag(token: str, path, lineno: int) -> bool:
    token = token.strip()
    if token == "0":
        return False
    if token == "1":
        return True
    raise ValidationError(f"{path}: line {lineno}: los flag must be 0 or 1, got {token!r}")


def load_pathloss_samples(path):
    """Read `freq_ghz,dist_m,pl_db,los[,weight]` CSV into PathLossSample list."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        base = ["freq_ghz", "dist_m", "pl_db", "los"]
        if header != base and header != base + ["weight"]:
            raise ValidationError(
                f"{path}: line 1: expected header freq_ghz,dist_m,pl_db,los[,weight], "
                f"got {','.join(header)}"
            )
        has_weight = len(header) == 5
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                samples.append(
                    PathLossSample(
                        f_ghz=float(row[0]),
                        d_m=float(row[1]),
                        pl_db=float(row[2]),
                        los=_parse_los_flag(row[3], path, lineno),
                        weight=float(row[4]) if has_weight else 1.0,
                    )
                )
            except ValidationError:
                raise
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
    if not samples:
        raise ValidationError(f"{path}: no sample rows found")
    return samples


def load_los_samples(path):
    """Read `dist_m,los` CSV into a LosSample list."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if header != ["dist_m", "los"]:
            raise ValidationError(
                f"{path}: line 1: expected header dist_m,los, got {','.join(header)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 2 fields, got {len(row)}"
                )
            try:
                samples.append(
                    LosSample(d_m=float(row[0]), los=_parse_los_flag(row[1], path, lineno))
                )
            except ValidationError:
                raise
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
    if not samples:
        raise ValidationError(f"{path}: no sample rows found")
    return samples
