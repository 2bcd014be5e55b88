"""Building-penetration and outdoor-to-indoor loss tests."""

import numpy as np
import pytest

from urbanprop.core import ValidationError
from urbanprop.penetration import BplClass, O2iConfig, bpl, o2i_loss


def test_bpl_golden_values_at_28ghz():
    assert bpl(BplClass.LOW_LOSS, 28.0) == pytest.approx(14.55149521179828, abs=1e-12)
    assert bpl(BplClass.HIGH_LOSS, 28.0) == pytest.approx(35.943925503754265, abs=1e-12)


def test_bpl_low_frequency_limit():
    # as f -> 0 the quadratic term vanishes: 10*log10(A).  Sub-band
    # frequencies are allowed but flagged.
    from urbanprop.core import FrequencyRangeWarning

    with pytest.warns(FrequencyRangeWarning):
        assert bpl(BplClass.LOW_LOSS, 1e-6) == pytest.approx(10 * np.log10(5.0), abs=1e-9)
    with pytest.warns(FrequencyRangeWarning):
        assert bpl(BplClass.HIGH_LOSS, 1e-6) == pytest.approx(10.0, abs=1e-9)


def test_bpl_monotone_in_frequency():
    f = np.geomspace(0.5, 100.0, 128)
    for cls in BplClass:
        assert np.all(np.diff(bpl(cls, f)) > 0.0)


def test_high_loss_exceeds_low_loss_everywhere():
    f = np.geomspace(0.5, 100.0, 64)
    assert np.all(bpl(BplClass.HIGH_LOSS, f) > bpl(BplClass.LOW_LOSS, f))


def test_bpl_class_from_string():
    assert BplClass.from_string("low") is BplClass.LOW_LOSS
    assert BplClass.from_string("HIGH") is BplClass.HIGH_LOSS
    with pytest.raises(ValidationError):
        BplClass.from_string("medium")


def test_o2i_collapses_to_bpl_at_zero_depth_and_normal_incidence():
    f = np.geomspace(0.5, 100.0, 32)
    for cls in BplClass:
        assert np.allclose(
            o2i_loss(cls, f, depth_m=0.0, incidence_deg=0.0), bpl(cls, f), atol=1e-9
        )


def test_o2i_depth_term_is_linear():
    base = o2i_loss(BplClass.LOW_LOSS, 28.0, 0.0, 0.0)
    cfg = O2iConfig(depth_loss_per_m=0.5)
    assert o2i_loss(BplClass.LOW_LOSS, 28.0, 10.0, 0.0, cfg) == pytest.approx(
        base + 5.0, abs=1e-12
    )
    cfg2 = O2iConfig(depth_loss_per_m=2.0)
    assert o2i_loss(BplClass.LOW_LOSS, 28.0, 10.0, 0.0, cfg2) == pytest.approx(
        base + 20.0, abs=1e-12
    )


def test_o2i_incidence_surcharge_golden():
    # surcharge = max * (1 - cos(angle)); at 80 deg with the 20 dB default
    base = bpl(BplClass.LOW_LOSS, 28.0)
    got = o2i_loss(BplClass.LOW_LOSS, 28.0, 0.0, 80.0)
    assert got - base == pytest.approx(16.52703644666139, abs=1e-12)


def test_o2i_surcharge_monotone_in_angle():
    angles = np.linspace(0.0, 89.9, 90)
    losses = np.array([o2i_loss(BplClass.LOW_LOSS, 28.0, 0.0, a) for a in angles])
    assert np.all(np.diff(losses) > 0.0)
    # bounded by the configured maximum
    assert losses[-1] - losses[0] < 20.0


def test_o2i_rejects_grazing_and_negative_angles():
    for bad in (-0.1, 90.0, 135.0):
        with pytest.raises(ValidationError):
            o2i_loss(BplClass.LOW_LOSS, 28.0, 5.0, bad)


def test_o2i_rejects_negative_depth():
    with pytest.raises(ValidationError):
        o2i_loss(BplClass.LOW_LOSS, 28.0, -1.0, 0.0)


def test_o2i_config_field_ranges():
    O2iConfig(incidence_surcharge_max_db=0.0, depth_loss_per_m=0.2)
    O2iConfig(incidence_surcharge_max_db=20.0, depth_loss_per_m=2.0)
    with pytest.raises(ValidationError):
        O2iConfig(incidence_surcharge_max_db=20.5)
    with pytest.raises(ValidationError):
        O2iConfig(incidence_surcharge_max_db=-1.0)
    with pytest.raises(ValidationError):
        O2iConfig(depth_loss_per_m=0.1)
    with pytest.raises(ValidationError):
        O2iConfig(depth_loss_per_m=2.5)


def test_o2i_vectorizes_over_frequency():
    f = np.array([6.0, 28.0, 73.0])
    out = o2i_loss(BplClass.HIGH_LOSS, f, 4.0, 30.0)
    assert out.shape == (3,)
    singles = [float(o2i_loss(BplClass.HIGH_LOSS, fi, 4.0, 30.0)) for fi in f]
    assert np.allclose(out, singles, atol=1e-12)
