"""Catalog contents, scenario parsing, and shared validation helpers."""

import warnings

import numpy as np
import pytest

from urbanprop.core import (
    BAND_MAX_GHZ,
    BAND_MIN_GHZ,
    SPEED_OF_LIGHT,
    FrequencyRangeWarning,
    ScenarioId,
    ValidationError,
    catalog_as_dict,
    catalog_lookup,
    catalog_scenarios,
    check_distance_m,
    check_frequency_ghz,
)


def test_speed_of_light_is_exact_si_value():
    assert SPEED_OF_LIGHT == 299_792_458.0


def test_band_limits():
    assert BAND_MIN_GHZ == 0.5
    assert BAND_MAX_GHZ == 100.0


# --- scenario ids ----------------------------------------------------------


def test_scenario_id_round_trip():
    for sid in ScenarioId:
        assert ScenarioId.from_string(sid.value) is sid


def test_scenario_id_from_string_is_case_insensitive():
    assert ScenarioId.from_string("UMa-LOS") is ScenarioId.UMA_LOS
    assert ScenarioId.from_string("uMi-Sc-nLoS") is ScenarioId.UMI_STREET_CANYON_NLOS


def test_scenario_id_rejects_unknown():
    with pytest.raises(ValidationError, match="scenario"):
        ScenarioId.from_string("rural-los")


def test_scenario_id_los_flag_and_environment():
    assert ScenarioId.UMA_LOS.is_los
    assert not ScenarioId.UMA_NLOS.is_los
    assert ScenarioId.UMA_LOS.environment == "uma"
    assert ScenarioId.UMI_STREET_CANYON_NLOS.environment == "umi-sc"
    assert ScenarioId.UMI_OPEN_SQUARE_LOS.environment == "umi-os"


# --- catalog ---------------------------------------------------------------

CI_TABLE = {
    "uma-los": (2.0, 4.1),
    "uma-nlos": (3.0, 6.8),
    "umi-sc-los": (1.98, 3.1),
    "umi-sc-nlos": (3.19, 8.2),
    "umi-os-los": (1.85, 4.2),
    "umi-os-nlos": (2.89, 7.1),
}

ABG_TABLE = {
    "uma-nlos": (3.4, 19.2, 2.3, 6.5),
    "umi-sc-nlos": (3.48, 21.02, 2.34, 7.8),
    "umi-os-nlos": (4.14, 3.66, 2.43, 7.0),
}


def test_catalog_ci_parameters():
    for sid, (n, sigma) in CI_TABLE.items():
        params = catalog_lookup(sid)
        assert params.ci_n == n
        assert params.ci_sigma_db == sigma


def test_catalog_abg_parameters_nlos_only():
    for sid, (alpha, beta, gamma, sigma) in ABG_TABLE.items():
        abg = catalog_lookup(sid).abg
        assert abg is not None
        assert (abg.alpha, abg.beta, abg.gamma, abg.sigma_db) == (alpha, beta, gamma, sigma)
    for sid in ("uma-los", "umi-sc-los", "umi-os-los"):
        params = catalog_lookup(sid)
        assert params.abg is None
        assert not params.abg_available


def test_catalog_los_model_parameters():
    # one (d1, d2) pair per macro environment
    assert catalog_lookup("uma-los").los.d1 == 18.0
    assert catalog_lookup("uma-nlos").los.d2 == 63.0
    for sid in ("umi-sc-los", "umi-sc-nlos", "umi-os-los", "umi-os-nlos"):
        los = catalog_lookup(sid).los
        assert (los.d1, los.d2) == (18.0, 36.0)


def test_catalog_lookup_accepts_enum_and_string():
    assert catalog_lookup(ScenarioId.UMA_LOS) is catalog_lookup("uma-los")


def test_catalog_scenarios_lists_all_six():
    assert catalog_scenarios() == list(ScenarioId)


def test_catalog_as_dict_is_json_shaped():
    records = catalog_as_dict()
    assert [r["scenario"] for r in records] == [s.value for s in ScenarioId]
    uma_nlos = next(r for r in records if r["scenario"] == "uma-nlos")
    assert uma_nlos["ci"] == {"n": 3.0, "sigma_db": 6.8}
    assert uma_nlos["abg"]["alpha"] == 3.4
    uma_los = next(r for r in records if r["scenario"] == "uma-los")
    assert uma_los["abg"] is None
    assert uma_los["los"] == {"d1": 18.0, "d2": 63.0}


# --- validation helpers ----------------------------------------------------


def test_check_frequency_rejects_nonpositive():
    with pytest.raises(ValidationError):
        check_frequency_ghz(0.0)
    with pytest.raises(ValidationError):
        check_frequency_ghz(np.array([28.0, -1.0]))


def test_check_frequency_warns_outside_band():
    with pytest.warns(FrequencyRangeWarning):
        check_frequency_ghz(0.1)
    with pytest.warns(FrequencyRangeWarning):
        check_frequency_ghz(140.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        check_frequency_ghz(28.0)  # in band: silent


def test_check_distance_floor():
    with pytest.raises(ValidationError):
        check_distance_m(0.5, minimum=1.0)
    check_distance_m(1.0, minimum=1.0)
    with pytest.raises(ValidationError):
        check_distance_m(np.array([5.0, np.nan]))
