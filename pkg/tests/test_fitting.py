"""Parameter-fitting tests: closed-form recovery, weighting semantics,
degeneracy handling, and LOS-probability grid search."""

import numpy as np
import pytest

from urbanprop.core import D1D2Params, ValidationError, catalog_lookup
from urbanprop.fitting import (
    D1_GRID_M,
    D2_GRID_M,
    LosSample,
    PathLossSample,
    SingleFrequencyWarning,
    SingularFitError,
    compare_los_models,
    fit_abg,
    fit_ci,
    fit_cif,
    fit_los_probability,
    load_los_samples,
    load_pathloss_samples,
)
from urbanprop.los import p_los_d1d2
from urbanprop.pathloss import AbgModel, CifModel, CiModel, abg_pl, ci_pl, cif_pl


def _ci_samples(n, f_ghz, d, noise=None, weight=None):
    pl = np.asarray(ci_pl(CiModel(n=n), f_ghz, d))
    if noise is not None:
        pl = pl + noise
    w = np.ones_like(d) if weight is None else np.asarray(weight, dtype=float)
    return [
        PathLossSample(f_ghz=f_ghz, d_m=float(di), pl_db=float(pi), weight=float(wi))
        for di, pi, wi in zip(d, pl, w)
    ]


# --- CI --------------------------------------------------------------------


def test_fit_ci_recovers_exponent_noise_free():
    d = np.geomspace(1.0, 500.0, 40)
    report = fit_ci(_ci_samples(2.5, 28.0, d))
    assert report.params["n"] == pytest.approx(2.5, abs=1e-9)
    assert report.sf_sigma_db == pytest.approx(0.0, abs=1e-9)
    assert report.model == "ci"


def test_fit_ci_sigma_equals_rms_residual():
    rng = np.random.default_rng(5)
    d = np.geomspace(2.0, 800.0, 300)
    noise = rng.normal(0.0, 4.0, d.size)
    report = fit_ci(_ci_samples(3.0, 28.0, d, noise=noise))
    res = np.asarray(report.residuals_db)
    assert report.sf_sigma_db == pytest.approx(np.sqrt(np.mean(res**2)), abs=1e-12)
    assert report.sf_sigma_db == pytest.approx(report.rmse_db, abs=1e-15)


def test_fit_ci_weight_two_equals_duplication():
    d = np.geomspace(1.0, 300.0, 25)
    rng = np.random.default_rng(8)
    noise = rng.normal(0.0, 3.0, d.size)
    base = _ci_samples(2.2, 73.0, d, noise=noise)
    doubled = base + [base[4], base[11]]
    weighted = list(base)
    for i in (4, 11):
        s = base[i]
        weighted[i] = PathLossSample(s.f_ghz, s.d_m, s.pl_db, s.los, weight=2.0)
    ra, rb = fit_ci(doubled), fit_ci(weighted)
    assert ra.params["n"] == pytest.approx(rb.params["n"], abs=1e-12)
    assert ra.sf_sigma_db == pytest.approx(rb.sf_sigma_db, abs=1e-12)


def test_fit_ci_singular_when_all_samples_at_reference_distance():
    samples = [PathLossSample(28.0, 1.0, 61.4), PathLossSample(28.0, 1.0, 62.0)]
    with pytest.raises(SingularFitError):
        fit_ci(samples)


def test_fit_ci_rejects_sub_reference_distances():
    with pytest.raises(ValidationError):
        fit_ci([PathLossSample(28.0, 0.5, 60.0), PathLossSample(28.0, 10.0, 80.0)])


# --- CIF -------------------------------------------------------------------


def test_fit_cif_exact_when_f0_matches_generator():
    truth = CifModel(n=3.2, b=-0.15, f0_ghz=50.5)
    rng = np.random.default_rng(23)
    samples = []
    for f in (28.0, 73.0):  # equal counts put the centroid at 50.5 GHz
        d = rng.uniform(2.0, 600.0, 40)
        pl = cif_pl(truth, f, d)
        samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
    report = fit_cif(samples)
    assert report.params["f0_ghz"] == pytest.approx(50.5, abs=1e-12)
    assert report.params["n"] == pytest.approx(3.2, abs=1e-9)
    assert report.params["b"] == pytest.approx(-0.15, abs=1e-9)
    assert report.sf_sigma_db == pytest.approx(0.0, abs=1e-7)


def test_fit_cif_single_frequency_falls_back_to_ci():
    d = np.geomspace(1.0, 200.0, 30)
    samples = _ci_samples(2.4, 28.0, d)
    with pytest.warns(SingleFrequencyWarning):
        report = fit_cif(samples)
    assert report.params["b"] == 0.0
    assert report.params["n"] == pytest.approx(2.4, abs=1e-9)
    assert report.notes  # the fallback is recorded, not silent


def test_fit_cif_sigma_never_worse_than_ci():
    """Adding the frequency-slope parameter can only shrink the RMS residual."""
    rng = np.random.default_rng(31)
    for _ in range(5):
        samples = []
        for f in (28.0, 39.0, 73.0):
            d = rng.uniform(2.0, 500.0, 80)
            pl = ci_pl(CiModel(n=2.8), f, d) + rng.normal(0, 5.0, d.size)
            samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
        assert fit_cif(samples).sf_sigma_db <= fit_ci(samples).sf_sigma_db + 1e-12


# --- ABG -------------------------------------------------------------------


def test_fit_abg_recovers_parameters_noise_free():
    truth = AbgModel(alpha=3.48, beta=21.02, gamma=2.34)
    rng = np.random.default_rng(41)
    samples = []
    for f in (2.0, 28.0, 60.0):
        d = rng.uniform(5.0, 500.0, 50)
        pl = abg_pl(truth, f, d)
        samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
    report = fit_abg(samples)
    assert report.params["alpha"] == pytest.approx(3.48, abs=1e-9)
    assert report.params["beta"] == pytest.approx(21.02, abs=1e-9)
    assert report.params["gamma"] == pytest.approx(2.34, abs=1e-9)


def test_fit_abg_residual_mean_is_zero():
    # ABG carries an intercept, so weighted LS forces a zero-mean residual
    rng = np.random.default_rng(47)
    samples = []
    for f in (28.0, 73.0):
        d = rng.uniform(10.0, 200.0, 100)
        pl = abg_pl(AbgModel(3.4, 19.2, 2.3), f, d) + rng.normal(0, 6.0, d.size)
        samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
    report = fit_abg(samples)
    assert float(np.mean(report.residuals_db)) == pytest.approx(0.0, abs=1e-9)


def test_fit_abg_needs_three_samples():
    with pytest.raises(ValidationError):
        fit_abg([PathLossSample(28.0, 10.0, 90.0), PathLossSample(28.0, 20.0, 95.0)])


def test_fit_abg_single_frequency_is_degenerate():
    d = np.geomspace(1.0, 100.0, 20)
    samples = _ci_samples(3.0, 28.0, d)
    with pytest.raises(SingularFitError, match="gamma"):
        fit_abg(samples)


def test_fit_abg_single_distance_is_degenerate():
    samples = [PathLossSample(f, 50.0, 100.0 + f) for f in (2.0, 28.0, 60.0, 73.0)]
    with pytest.raises(SingularFitError, match="alpha"):
        fit_abg(samples)


def test_fit_abg_accepts_sub_meter_distances():
    truth = AbgModel(3.0, 20.0, 2.2)
    d = np.geomspace(0.02, 80.0, 30)
    samples = []
    for f in (6.0, 28.0):
        pl = abg_pl(truth, f, d)
        samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
    report = fit_abg(samples)
    assert report.params["alpha"] == pytest.approx(3.0, abs=1e-9)


# --- catalog round trips ---------------------------------------------------


def test_ci_round_trip_all_catalog_scenarios():
    rng = np.random.default_rng(53)
    for params in (catalog_lookup(s) for s in
                   ("uma-los", "uma-nlos", "umi-sc-los", "umi-sc-nlos",
                    "umi-os-los", "umi-os-nlos")):
        d = rng.uniform(1.0, 800.0, 60)
        samples = _ci_samples(params.ci_n, 28.0, d)
        got = fit_ci(samples).params["n"]
        assert got == pytest.approx(params.ci_n, abs=1e-9)


def test_abg_round_trip_all_nlos_scenarios():
    rng = np.random.default_rng(59)
    for sid in ("uma-nlos", "umi-sc-nlos", "umi-os-nlos"):
        abg = catalog_lookup(sid).abg
        truth = AbgModel(abg.alpha, abg.beta, abg.gamma)
        samples = []
        for f in (2.0, 28.0, 73.0):
            d = rng.uniform(10.0, 500.0, 40)
            pl = abg_pl(truth, f, d)
            samples += [PathLossSample(f, float(di), float(pi)) for di, pi in zip(d, pl)]
        report = fit_abg(samples)
        assert report.params["alpha"] == pytest.approx(abg.alpha, abs=1e-8)
        assert report.params["beta"] == pytest.approx(abg.beta, abs=1e-7)
        assert report.params["gamma"] == pytest.approx(abg.gamma, abs=1e-8)


# --- LOS-probability fitting -----------------------------------------------


def _bernoulli_los_samples(d1, d2, n, seed, d_max=400.0, squared=False):
    rng = np.random.default_rng(seed)
    d = rng.uniform(1.0, d_max, n)
    p = np.asarray(p_los_d1d2(D1D2Params(d1=d1, d2=d2), d))
    if squared:
        p = p * p
    los = rng.random(n) < p
    return [LosSample(d_m=float(di), los=bool(li)) for di, li in zip(d, los)]


def test_los_grid_definition():
    assert D1_GRID_M[0] == 1.0 and D1_GRID_M[-1] == 100.0 and D1_GRID_M.size == 100
    assert D2_GRID_M[0] == 1.0 and D2_GRID_M[-1] == 300.0 and D2_GRID_M.size == 300


def test_fit_los_probability_recovers_generator():
    samples = _bernoulli_los_samples(20.0, 66.0, 10_000, seed=71)
    report = fit_los_probability(samples, model="d1d2")
    assert abs(report.params.d1 - 20.0) <= 2.0
    assert abs(report.params.d2 - 66.0) <= 8.0
    assert not report.degenerate


def test_fit_los_probability_squared_variant():
    samples = _bernoulli_los_samples(20.0, 160.0, 20_000, seed=73, d_max=600.0, squared=True)
    report = fit_los_probability(samples, model="nyu_squared")
    assert report.model == "nyu_squared"
    assert abs(report.params.d1 - 20.0) <= 3.0
    assert abs(report.params.d2 - 160.0) <= 20.0


def test_fit_los_probability_is_deterministic():
    samples = _bernoulli_los_samples(18.0, 63.0, 4000, seed=79)
    a = fit_los_probability(samples)
    b = fit_los_probability(samples)
    assert (a.params.d1, a.params.d2, a.mse) == (b.params.d1, b.params.d2, b.mse)


def test_fit_los_probability_flags_degenerate_saturated_data():
    # all-LOS data far beyond the d1 grid drives d1 to the top of its range
    samples = [LosSample(d_m=float(d), los=True) for d in np.linspace(1.0, 400.0, 800)]
    report = fit_los_probability(samples)
    assert report.params.d1 == 100.0
    assert report.degenerate


def test_fit_los_probability_tie_break_prefers_smallest_parameters():
    # all-LOS data inside the grid: every (d1 >= 95, d2) hits MSE 0, and the
    # row-major tie-break must settle on the smallest d1, then the smallest d2
    samples = [LosSample(d_m=float(d), los=True) for d in np.linspace(1.0, 99.0, 500)]
    report = fit_los_probability(samples)
    assert (report.params.d1, report.params.d2) == (95.0, 1.0)
    assert report.mse == 0.0
    assert not report.degenerate


def test_fit_los_probability_needs_two_bins():
    samples = [LosSample(d_m=5.0 + 0.001 * i, los=True) for i in range(10)]
    with pytest.raises(ValidationError):
        fit_los_probability(samples, bin_width_m=10.0)


def test_fit_los_probability_rejects_unknown_model():
    samples = _bernoulli_los_samples(18.0, 63.0, 100, seed=83)
    with pytest.raises(ValidationError):
        fit_los_probability(samples, model="sigmoid")


def test_compare_los_models_row_shape():
    samples = _bernoulli_los_samples(18.0, 63.0, 5000, seed=89)
    rows = compare_los_models(samples, environment="uma")
    assert [r["model"] for r in rows] == ["3gpp-uma", "d1d2", "nyu-squared"]
    fixed = rows[0]
    assert (fixed["d1"], fixed["d2"]) == (18.0, 63.0)
    for row in rows:
        assert row["mse"] >= 0.0
    # the free fit cannot lose to the fixed default on the same objective
    assert rows[1]["mse"] <= rows[0]["mse"] + 1e-15


def test_compare_los_models_umi_default():
    samples = _bernoulli_los_samples(18.0, 36.0, 5000, seed=97)
    rows = compare_los_models(samples, environment="umi")
    assert rows[0]["model"] == "3gpp-umi"
    assert (rows[0]["d1"], rows[0]["d2"]) == (18.0, 36.0)


# --- CSV loaders -----------------------------------------------------------


def test_load_pathloss_samples_round_trip(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text(
        "freq_ghz,dist_m,pl_db,los,weight\n"
        "28.0,100.0,101.39,1,1.0\n"
        "73.0,250.5,140.2,0,2.5\n"
    )
    samples = load_pathloss_samples(p)
    assert len(samples) == 2
    assert samples[0].los is True and samples[1].los is False
    assert samples[1].weight == 2.5


def test_load_pathloss_samples_weight_optional(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("freq_ghz,dist_m,pl_db,los\n28.0,100.0,101.39,0\n")
    assert load_pathloss_samples(p)[0].weight == 1.0


def test_load_pathloss_samples_errors_name_line(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("freq_ghz,dist_m,pl_db,los\n28.0,100.0,101.39,0\n28.0,oops,90.0,0\n")
    with pytest.raises(ValidationError, match="line 3"):
        load_pathloss_samples(p)


def test_load_pathloss_samples_rejects_bad_header(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("f,d,pl\n28.0,100.0,101.39\n")
    with pytest.raises(ValidationError):
        load_pathloss_samples(p)


def test_load_los_samples_flag_must_be_zero_or_one(tmp_path):
    p = tmp_path / "los.csv"
    p.write_text("dist_m,los\n10.0,1\n20.0,true\n")
    with pytest.raises(ValidationError, match="line 3"):
        load_los_samples(p)


def test_load_los_samples_round_trip(tmp_path):
    p = tmp_path / "los.csv"
    p.write_text("dist_m,los\n10.0,1\n200.0,0\n")
    samples = load_los_samples(p)
    assert [s.los for s in samples] == [True, False]
    assert [s.d_m for s in samples] == [10.0, 200.0]
