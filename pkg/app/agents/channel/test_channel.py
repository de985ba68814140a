import math

import numpy as np
import pandas as pd
import pytest

from app.agents.channel import (
    ChannelModelFactory,
    PowerBounds,
    compute_node_budgets,
    energy_over_period,
    link_power,
    node_lifetime,
    power_bounds,
    pt_max,
    pt_min,
    threshold_length,
)
from app.agents.channel.calibration import calibrate_external_factor, fit_channel_params, fit_lifetime_model
from app.agents.utils import (
    ChannelModelType,
    ChannelParams,
    ChannelPathParams,
    DegenerateLinkError,
    LifetimeParams,
    NodeUnreachableError,
    PathType,
    ScenarioConfig,
    Tissue,
    UnderdeterminedFitError,
    UnreachableGainError,
    UnsafeThresholdOverrideError,
)

MEASUREMENTS = pd.DataFrame(
    {
        "path": ["S-S", "S-S", "M-S", "M-S"],
        "length_cm": [14.0, 5.0, 14.0, 5.0],
        "pt_mw": [6.5, 0.8, 4.6, 0.2],
    }
)


def tabulated_params():
    return ChannelParams(
        kind=ChannelModelType.TABULATED,
        ss=ChannelPathParams(
            reference_gain=1e-7, path_loss_exponent=2.0,
            table=[(1.0, 1e-5), (5.0, 6e-7), (14.0, 7e-8), (30.0, 1e-8)],
        ),
        ms=ChannelPathParams(
            reference_gain=1e-6, path_loss_exponent=3.0, depth_bonus=1.05,
            table=[(1.0, 3e-4), (5.0, 2.5e-6), (14.0, 1.1e-7), (30.0, 9e-9)],
        ),
    )


def test_gain_reference_point_and_power_law(channel, config):
    p = config.channel.ss
    assert channel.gain(PathType.SS, config.channel.reference_length) == pytest.approx(p.reference_gain)
    ratio = channel.gain(PathType.SS, 3.0) / channel.gain(PathType.SS, 6.0)
    assert ratio == pytest.approx(2 ** p.path_loss_exponent)


def test_gain_rejects_degenerate_link(channel):
    with pytest.raises(DegenerateLinkError, match="degenerate link"):
        channel.gain(PathType.MS, 0.0)


def test_depth_bonus_only_on_muscle_paths():
    params = ChannelParams().model_copy(
        update={"ms": ChannelPathParams(reference_gain=1e-6, path_loss_exponent=3.0, depth_bonus=1.2)}
    )
    model = ChannelModelFactory.create_model(params)
    assert model.gain(PathType.MS, 5.0, depth=2.0) == pytest.approx(model.gain(PathType.MS, 5.0) * 1.44)
    assert model.gain(PathType.SS, 5.0, depth=2.0) == model.gain(PathType.SS, 5.0)


def test_inverse_gain_round_trip(channel):
    rng = np.random.default_rng(11)
    paths = [PathType.SS, PathType.MS]
    for _ in range(10_000):
        path = paths[rng.integers(2)]
        length = float(rng.uniform(0.01, 100.0))
        depth = float(rng.uniform(0.0, 4.0))
        recovered = channel.inverse_gain(path, channel.gain(path, length, depth), depth)
        assert recovered == pytest.approx(length, rel=1e-9)


def test_inverse_gain_reference_and_monotone(channel, config):
    p = config.channel.ms
    assert channel.inverse_gain(PathType.MS, p.reference_gain) == pytest.approx(config.channel.reference_length)
    assert channel.inverse_gain(PathType.MS, 1e-5) < channel.inverse_gain(PathType.MS, 1e-6)


def test_inverse_gain_unreachable(channel):
    with pytest.raises(UnreachableGainError, match="unreachable gain"):
        channel.inverse_gain(PathType.SS, 0.0)
    with pytest.raises(UnreachableGainError):
        channel.inverse_gain(PathType.SS, channel.max_gain(PathType.SS) * 2)


def test_tabulated_model_numerical_inverse():
    model = ChannelModelFactory.create_model(tabulated_params())
    rng = np.random.default_rng(3)
    for _ in range(200):
        path = PathType.MS if rng.random() < 0.5 else PathType.SS
        length = float(rng.uniform(0.1, 60.0))
        depth = float(rng.uniform(0.0, 3.0))
        recovered = model.inverse_gain(path, model.gain(path, length, depth), depth)
        assert recovered == pytest.approx(length, rel=1e-9)
    assert model.gain(PathType.SS, 5.0) == pytest.approx(6e-7)


def test_calibration_anchor_ratios(channel, config):
    ss = pt_min(config, channel.gain(PathType.SS, 14.0)) / pt_min(config, channel.gain(PathType.SS, 5.0))
    ms = pt_min(config, channel.gain(PathType.MS, 14.0)) / pt_min(config, channel.gain(PathType.MS, 5.0))
    assert ss == pytest.approx(6.5 / 0.8, rel=0.1)
    assert ms == pytest.approx(4.6 / 0.2, rel=0.1)
    assert pt_min(config, channel.gain(PathType.SS, 5.0)) == pytest.approx(0.8e-3, rel=1e-4)
    assert pt_min(config, channel.gain(PathType.MS, 14.0)) == pytest.approx(4.6e-3, rel=1e-4)


def test_pt_min_examples():
    config = ScenarioConfig(snr_target=5, noise_psd=1e-14, bandwidth=1e4)
    assert pt_min(config, 1e-6) == pytest.approx(5e-4)
    assert pt_min(config, 1.0) == pytest.approx(5e-10)


def test_pt_max_examples(make_node):
    config = ScenarioConfig(safe_power=1e-3)
    assert pt_max(config, make_node("a", 0, 0, energy=302.4, lifetime=604800)) == pytest.approx(5e-4)
    assert pt_max(config, make_node("b", 0, 0, energy=1209.6, lifetime=604800)) == pytest.approx(1e-3)
    assert pt_max(config, make_node("c", 0, 0, energy=0.0)) == 0.0


def test_threshold_length_is_power_crossing(config, channel, make_node):
    for node in (make_node("s", 1, 1), make_node("m", 1, 1, z=2.0)):
        lth = threshold_length(config, node, channel)
        assert pt_min(config, channel.gain(node.path, lth, node.z)) == pytest.approx(pt_max(config, node), abs=1e-9)
        assert threshold_length(config, node, channel, bisect=True) == pytest.approx(lth, rel=1e-9)


def test_threshold_length_monotone_in_energy(config, channel, make_node):
    small = threshold_length(config, make_node("a", 0, 0, energy=1000.0), channel)
    large = threshold_length(config, make_node("a", 0, 0, energy=2000.0), channel)
    assert large >= small


def test_muscle_threshold_exceeds_surface_threshold(config, channel, make_node):
    surface = threshold_length(config, make_node("s", 0, 0), channel)
    implant = threshold_length(config, make_node("m", 0, 0, tissue=Tissue.MUSCLE), channel)
    assert implant >= surface


def test_threshold_length_dead_node(config, channel, make_node):
    with pytest.raises(NodeUnreachableError, match="node unreachable"):
        threshold_length(config, make_node("dead", 0, 0, energy=0.0), channel)


def test_power_bounds_at_and_beyond_threshold(config, channel, make_node):
    node = make_node("s", 0, 0)
    lth = threshold_length(config, node, channel)
    inside = power_bounds(config, channel, node, 0.5 * lth)
    assert inside.pt_max == pt_max(config, node)
    assert inside.pt_min == pytest.approx(link_power(config, channel, node, 0.5 * lth))
    assert inside.feasible
    assert not power_bounds(config, channel, node, 1.5 * lth).feasible
    assert power_bounds(config, channel, node, 0.0).pt_min == 0.0
    assert power_bounds(config, channel, node, lth, cap=1.0).pt_max == 1.0
    assert PowerBounds(pt_min=1.0 + 1e-12, pt_max=1.0).within(1e-9)


def test_threshold_override_caps_power_at_the_forced_length(channel, make_node):
    config = ScenarioConfig(threshold_override_ss=14.0)
    budget = compute_node_budgets([make_node("s", 0, 0)], config, channel)["s"]
    assert budget.threshold == 14.0
    assert budget.pt_max == pytest.approx(6.5e-3, rel=1e-3)
    assert budget.pt_max <= config.safe_power


def test_threshold_override_above_safe_power_is_rejected(channel, make_node):
    config = ScenarioConfig(threshold_override_ss=30.0)
    with pytest.raises(UnsafeThresholdOverrideError, match="above safe power") as e:
        compute_node_budgets([make_node("s", 0, 0)], config, channel)
    assert e.value.power > config.safe_power
    # the M-S override is untouched by a surface-only scenario
    relaxed = ScenarioConfig(threshold_override_ms=30.0)
    assert compute_node_budgets([make_node("s", 0, 0)], relaxed, channel)["s"].threshold < 30.0


def test_energy_over_period(config, make_node):
    node = make_node("a", 0, 0, rate=1.0, modulation=2)
    double = make_node("b", 0, 0, rate=2.0, modulation=2)
    base = energy_over_period(node, 1e-3, config)
    assert energy_over_period(double, 1e-3, config) == pytest.approx(2 * base)
    expected = (1e-3 / config.bandwidth) * 1.0 * node.required_lifetime / config.bandwidth
    assert base == pytest.approx(expected)
    assert energy_over_period(node, 1e-3, config, period=0.0) == 0.0
    quad = make_node("c", 0, 0, rate=1.0, modulation=4)
    assert energy_over_period(quad, 1e-3, config) == pytest.approx(base / 2)


def test_node_lifetime_anchors():
    lifetime = LifetimeParams()
    assert node_lifetime(2e-3, lifetime) == pytest.approx(254.0, rel=1e-3)
    assert node_lifetime(20e-6, lifetime) >= 295.0
    # one anchor only: the low-load end is far above the two-anchor fit
    assert node_lifetime(20e-6, lifetime) == pytest.approx(4445.0, rel=1e-3)
    powers = [0.0, 1e-5, 1e-4, 1e-3, 1e-2]
    days = [node_lifetime(p, lifetime) for p in powers]
    assert all(a > b for a, b in zip(days, days[1:]))


def test_calibrate_external_factor():
    calibrated = calibrate_external_factor(2e-3, 254.0, LifetimeParams(external_factor=5.0))
    assert calibrated.external_factor == pytest.approx(1.778, rel=1e-4)


def test_two_anchor_lifetime_fit():
    fitted = fit_lifetime_model([(2e-3, 254.0), (20e-6, 300.0)], LifetimeParams())
    assert node_lifetime(2e-3, fitted) == pytest.approx(254.0, rel=1e-9)
    assert node_lifetime(20e-6, fitted) == pytest.approx(300.0, rel=0.05)
    assert fitted.overhead_power > 0


def test_fit_channel_params_reproduces_exponents(config):
    result = fit_channel_params(MEASUREMENTS, config)
    assert result.fits[PathType.SS].path_loss_exponent == pytest.approx(math.log(6.5 / 0.8) / math.log(2.8), rel=1e-9)
    assert result.fits[PathType.MS].path_loss_exponent == pytest.approx(3.05, abs=0.01)
    assert result.channel.ss.reference_gain == pytest.approx(config.channel.ss.reference_gain, rel=1e-4)
    assert result.channel.ms.reference_gain == pytest.approx(config.channel.ms.reference_gain, rel=1e-4)
    assert max(abs(r) for r in result.fits[PathType.SS].residuals) < 1e-9


def test_fit_channel_params_ignores_duplicates(config):
    duplicated = pd.concat([MEASUREMENTS, MEASUREMENTS.iloc[[0, 0, 3]]], ignore_index=True)
    assert fit_channel_params(duplicated, config).channel == fit_channel_params(MEASUREMENTS, config).channel


def test_fit_channel_params_underdetermined(config):
    with pytest.raises(UnderdeterminedFitError, match="underdetermined"):
        fit_channel_params(MEASUREMENTS.iloc[[0, 2, 3]], config)
