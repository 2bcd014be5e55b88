"""LOS-probability model tests: golden values, exact short-range behavior,
the squared variant, and the height-dependent urban-macro correction."""

import numpy as np
import pytest

from urbanprop.core import D1D2Params, ValidationError
from urbanprop.los import (
    UMA_D1D2,
    UMA_H_HIGH_M,
    UMA_H_LOW_M,
    indoor_effective_distance,
    p_los_3gpp_uma,
    p_los_d1d2,
    p_los_nyu_squared,
)


def test_d1d2_golden_values():
    umi = D1D2Params(d1=18.0, d2=36.0)
    assert p_los_d1d2(umi, 100.0) == pytest.approx(0.23098474969813537, abs=1e-12)
    uma = D1D2Params(d1=18.0, d2=63.0)
    assert p_los_d1d2(uma, 200.0) == pytest.approx(0.12804773002754427, abs=1e-12)
    nyu = D1D2Params(d1=20.0, d2=160.0)
    assert p_los_d1d2(nyu, 100.0) == pytest.approx(0.6282091428151922, abs=1e-12)


def test_probability_is_exactly_one_at_or_below_d1():
    """Not merely close to 1: the short-range branch must return 1.0 bit-exactly."""
    params = D1D2Params(d1=18.0, d2=63.0)
    d = np.array([0.1, 1.0, 17.999999, 18.0])
    assert np.all(p_los_d1d2(params, d) == 1.0)
    assert np.all(p_los_nyu_squared(params, d) == 1.0)
    h = 1.5
    assert np.all(p_los_3gpp_uma(d, h) == 1.0)


def test_nyu_variant_is_square_of_base_model():
    params = D1D2Params(d1=20.0, d2=160.0)
    d = np.geomspace(1.0, 2000.0, 64)
    assert np.allclose(p_los_nyu_squared(params, d), p_los_d1d2(params, d) ** 2, atol=1e-15)
    assert p_los_nyu_squared(params, 100.0) == pytest.approx(0.3946467271165986, abs=1e-12)


def test_probability_bounds_and_monotone_tail():
    rng = np.random.default_rng(11)
    for _ in range(10):
        params = D1D2Params(d1=rng.uniform(1, 100), d2=rng.uniform(1, 300))
        d = np.linspace(0.5, 5000.0, 2000)
        p = p_los_d1d2(params, d)
        assert np.all((p >= 0.0) & (p <= 1.0))
        tail = p[d > params.d1]
        assert np.all(np.diff(tail) <= 1e-15)  # non-increasing beyond d1


def test_3gpp_uma_reduces_to_base_model_below_13m():
    d = np.geomspace(1.0, 3000.0, 50)
    base = p_los_d1d2(UMA_D1D2, d)
    for h in (1.5, 5.0, 12.999):
        assert np.allclose(p_los_3gpp_uma(d, h), base, atol=1e-15)


def test_3gpp_uma_golden_at_23m():
    assert p_los_3gpp_uma(200.0, 23.0) == pytest.approx(0.12973538078641808, abs=1e-12)
    # the same distance without the height boost
    assert p_los_3gpp_uma(200.0, 1.5) == pytest.approx(0.12804773002754427, abs=1e-12)


def test_3gpp_uma_height_gain_inactive_at_18m_or_less():
    # the distance gate g(d) is zero up to 18 m, so height cannot matter there
    d = np.array([5.0, 18.0])
    assert np.all(p_los_3gpp_uma(d, 23.0) == p_los_3gpp_uma(d, 1.5))


def test_3gpp_uma_height_monotone():
    d = 200.0
    heights = np.linspace(UMA_H_LOW_M, UMA_H_HIGH_M, 21)
    p = np.array([p_los_3gpp_uma(d, h) for h in heights])
    assert np.all(np.diff(p) >= 0.0)
    assert p[0] == p_los_3gpp_uma(d, 1.5)  # h=13 boundary: correction is zero


def test_3gpp_uma_rejects_heights_above_23m():
    with pytest.raises(ValidationError, match="height"):
        p_los_3gpp_uma(100.0, 23.0001)


def test_3gpp_uma_clamped_to_unit_interval():
    d = np.geomspace(0.5, 10_000.0, 400)
    p = p_los_3gpp_uma(d, 23.0)
    assert np.all((p >= 0.0) & (p <= 1.0))


def test_d1d2_rejects_nonpositive_parameters():
    with pytest.raises(ValidationError):
        D1D2Params(d1=0.0, d2=63.0)
    with pytest.raises(ValidationError):
        D1D2Params(d1=18.0, d2=-1.0)


def test_indoor_effective_distance_is_wall_distance():
    assert indoor_effective_distance(105.0) == 105.0
    with pytest.raises(ValidationError):
        indoor_effective_distance(-1.0)
