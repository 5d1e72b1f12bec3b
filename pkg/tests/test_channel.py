import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from hmtsim.channel import (
    ChannelRealization,
    NoiseSpec,
    ScatteringSpec,
    add_noise,
    apply_channel,
    sample_realization,
    scattering_density,
)
from hmtsim.pulses import SampledSignal

from conftest import SIGMA_REF


def pooled(spec, n_real, n_paths=64, seed=0):
    reals = [sample_realization(spec, n_paths, s) for s in np.random.SeedSequence(seed).spawn(n_real)]
    return np.concatenate([r.tau for r in reals]), np.concatenate([r.nu for r in reals])


def test_uniform_density_value():
    spec = ScatteringSpec.uni(1e-5, 1e4)
    assert scattering_density(spec, 5e-6, 0.0) == pytest.approx(5.0)
    assert scattering_density(spec, 2e-5, 0.0) == 0.0
    assert scattering_density(spec, 5e-6, 1e4) == 0.0


def test_exponential_density_edge_blowup():
    spec = ScatteringSpec.exp(1e-5, 1e4)
    vals = [scattering_density(spec, 1e-6, 1e4 * (1 - 10.0**-k)) for k in (2, 4, 6, 8)]
    assert np.all(np.diff(vals) > 0) and vals[-1] > 100 * vals[0]


@pytest.mark.parametrize("kind", ["uni", "exp"])
def test_density_integrates_to_one(kind):
    spec = ScatteringSpec(kind, 1e-5, 1e4)
    tau_hi = spec.delay if kind == "uni" else 50 * spec.delay

    def integrand(theta, tau):
        nu = spec.f_d * math.sin(theta)
        return scattering_density(spec, tau, nu) * spec.f_d * math.cos(theta)

    val, _ = integrate.dblquad(integrand, 0, tau_hi, -math.pi / 2, math.pi / 2, epsabs=1e-10)
    assert val == pytest.approx(1.0, abs=1e-3)


def test_spread_split():
    spec = ScatteringSpec.from_spread("exp", 0.2, SIGMA_REF)
    assert spec.spread_factor == pytest.approx(0.2)
    assert spec.delay / spec.f_d == pytest.approx(SIGMA_REF)
    assert spec.tau_rms == spec.delay
    with pytest.raises(AttributeError):
        spec.tau_max
    with pytest.raises(ValueError):
        ScatteringSpec.from_spread("uni", 0.0, SIGMA_REF)
    with pytest.raises(ValueError):
        ScatteringSpec("rayleigh", 1, 1)
    assert ScatteringSpec("DD-UNI", 1e-5, 1e3).kind == "uni"


def test_single_path_normalised():
    r = sample_realization(ScatteringSpec.uni(1e-5, 1e4), 1, 3)
    assert r.n_paths == 1 and abs(r.gain[0]) ** 2 == pytest.approx(1.0, abs=1e-15)


def test_uniform_mean_delay():
    spec = ScatteringSpec.uni(1e-5, 1e4)
    tau, nu = pooled(spec, 1563)
    assert tau.size >= 10**5
    assert tau.mean() == pytest.approx(spec.delay / 2, rel=0.01)
    assert np.all((tau > 0) & (tau <= spec.delay)) and np.all(np.abs(nu) < spec.f_d)


def test_exponential_mean_delay():
    spec = ScatteringSpec.exp(1e-5, 1e4)
    tau, nu = pooled(spec, 1563)
    assert tau.mean() == pytest.approx(spec.delay, rel=0.02)
    assert tau.max() <= 10 * spec.delay and np.all(np.abs(nu) < spec.f_d)


@pytest.mark.parametrize("kind", ["uni", "exp"])
def test_pooled_histogram_matches_density(kind):
    spec = ScatteringSpec(kind, 1e-5, 1e4)
    tau, nu = pooled(spec, 200, seed=11)
    # equal-probability bins from the marginal CDFs (delay and Doppler are independent)
    if kind == "uni":
        u_tau = tau / spec.delay
        u_nu = (nu / spec.f_d + 1) / 2
    else:
        u_tau = (1 - np.exp(-tau / spec.delay)) / (1 - math.exp(-10))
        u_nu = 0.5 + np.arcsin(nu / spec.f_d) / math.pi
    counts, _, _ = np.histogram2d(u_tau, u_nu, bins=10, range=[[0, 1], [0, 1]])
    expected = np.full(100, tau.size / 100)
    p = stats.chisquare(counts.ravel(), expected).pvalue
    assert p > 0.01


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["uni", "exp"]), st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_realization_power_exact(kind, n_paths, seed):
    r = sample_realization(ScatteringSpec(kind, 1e-5, 1e4), n_paths, seed)
    assert abs(r.power - 1.0) < 1e-12


def test_realization_json_roundtrip():
    r = sample_realization(ScatteringSpec.exp(1e-5, 1e4), 8, 5)
    back = ChannelRealization.from_json(r.to_json())
    np.testing.assert_array_equal(back.tau, r.tau)
    np.testing.assert_array_equal(back.gain, r.gain)
    assert back.scattering == r.scattering
    with pytest.raises(ValueError):
        ChannelRealization.from_json('{"schema": "other", "paths": []}')


def test_realization_validation():
    with pytest.raises(ValueError):
        ChannelRealization([0.0, 1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        ChannelRealization([-1.0], [0.0], [1.0])


def test_identity_channel():
    x = SampledSignal(np.random.default_rng(0).standard_normal(50) + 0j, 1e-6, 3e-6)
    y = apply_channel(ChannelRealization.identity(), x)
    np.testing.assert_array_equal(y.samples, x.samples)
    assert y.t0 == x.t0


def test_single_path_delay():
    x = SampledSignal(np.arange(1, 11) + 0j, 1e-6)
    y = apply_channel(ChannelRealization([4e-6], [0.0], [1.0]), x)
    np.testing.assert_array_equal(y.samples[:4], 0)
    np.testing.assert_array_equal(y.samples[4:], x.samples)


def test_two_path_impulse_response():
    ts, t0 = 1e-6, -5e-6
    x = SampledSignal(np.eye(1, 40, 5)[0] + 0j, ts, t0)  # impulse at t = 0
    h = np.array([0.6, 0.8j])
    tau = np.array([3e-6, 11e-6])
    nu = np.array([1500.0, -700.0])
    y = apply_channel(ChannelRealization(tau, nu, h), x)
    expected = np.zeros(len(y), complex)
    for hp, tp, vp in zip(h, tau, nu):
        k = 5 + int(round(tp / ts))
        expected[k] += hp * np.exp(2j * math.pi * vp * (t0 + k * ts))
    np.testing.assert_allclose(y.samples, expected, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10), st.complex_numbers(max_magnitude=10))
def test_channel_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    x = SampledSignal(rng.standard_normal(300) + 1j * rng.standard_normal(300), 1e-6)
    z = SampledSignal(rng.standard_normal(300) + 1j * rng.standard_normal(300), 1e-6)
    real = sample_realization(ScatteringSpec.uni(2e-5, 5e3), 16, seed)
    lhs = apply_channel(real, SampledSignal(a * x.samples + b * z.samples, 1e-6)).samples
    rhs = a * apply_channel(real, x).samples + b * apply_channel(real, z).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)))


def test_zero_noise_is_identity():
    x = SampledSignal(np.ones(10) + 0j, 1e-6)
    np.testing.assert_array_equal(add_noise(x, NoiseSpec(0.0), 1).samples, x.samples)


def test_noise_variance():
    x = SampledSignal(np.zeros(10**6) + 0j, 1e-6)
    w = add_noise(x, NoiseSpec(0.3), 2).samples
    assert np.mean(np.abs(w) ** 2) == pytest.approx(0.3, rel=0.01)
    assert np.var(w.real) == pytest.approx(0.15, rel=0.01)
    with pytest.raises(ValueError):
        NoiseSpec(-1.0)
