"""End-to-end acceptance criteria; each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s``.  The Monte Carlo
criteria take several minutes each.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from hmtsim.channel import ScatteringSpec, apply_channel, sample_realization
from hmtsim.lattice import LatticeSpec, default_sigma
from hmtsim.montecarlo import SimConfig, analytic_curve, horizontal_gain, measure_ber, measure_sinr, robustness_sweep
from hmtsim.pulses import SampledSignal
from hmtsim.sinr import (
    SinrParams,
    closed_form_offset,
    numeric_offset_exp,
    sinr_db,
    sinr_exp,
    upper_bound_search,
)
from hmtsim.validation import ambiguity_oracle_report, run_validation

from conftest import ACCEPTANCE_LINES

LAT = LatticeSpec(1e-4, 2.5e4)
SIGMA = default_sigma(LAT)


def verdict(name, passed, detail):
    ACCEPTANCE_LINES.append((name, bool(passed), detail))
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


def params(kind, spread, snr_db=20.0):
    return SinrParams.from_snr(ScatteringSpec.from_spread(kind, spread, SIGMA), LAT, SIGMA, snr_db)


def gain_db(kind, spread, snr_db):
    p = params(kind, spread, snr_db)
    return sinr_db(p, *closed_form_offset(SIGMA, p.scattering)) - sinr_db(p, 0.0, 0.0)


def test_c01_uniform_offset_upper_bound():
    worst = []
    ok = True
    for spread in (0.07, 0.1, 0.2, 0.35):
        t0 = time.perf_counter()
        p = params("uni", spread)
        r = upper_bound_search(p)
        elapsed = time.perf_counter() - t0
        rel_t = abs(r.delta_t / (p.scattering.delay / 2) - 1)
        rel_f = abs(r.delta_f) / p.scattering.f_d
        ok &= rel_t <= 0.01 and rel_f < 1e-3 and elapsed < 60
        worst.append(f"{spread}: dt err {rel_t:.1e}, |df|/fd {rel_f:.1e}, {elapsed:.1f}s")
    verdict("C1 uniform channel offset (tau_max/2, 0)", ok, "; ".join(worst))


def test_c02_exponential_closed_form_offset():
    parts = []
    ok = True
    for spread in (0.07, 0.1, 0.2):
        p = params("exp", spread)
        dt_cf, df_cf = closed_form_offset(SIGMA, p.scattering)
        dt_num = numeric_offset_exp(SIGMA, p.scattering)
        loss = sinr_exp(p, dt_num, 0.0) - sinr_exp(p, dt_cf, 0.0)
        ub = upper_bound_search(p)
        # golden-section resolution on the Doppler axis
        df_res = 1e-4 * 2 * p.scattering.f_d
        ok &= loss <= 0.05 and df_cf == 0.0 and abs(ub.delta_f) <= df_res
        parts.append(f"{spread}: loss {loss:.4f} dB, ub df {ub.delta_f:.2g} Hz")
    verdict("C2 exponential closed-form offset", ok, "; ".join(parts))


def test_c03_ambiguity_oracle():
    rep = ambiguity_oracle_report(n_draws=100, seed=2024)
    c = rep.checks[0]
    verdict("C3 ambiguity closed form vs numeric", rep.passed, f"max |error| {c.value:.2e} (limit {c.threshold:g})")


@pytest.mark.slow
@pytest.mark.parametrize("kind,spread", [("uni", 0.07), ("uni", 0.2), ("exp", 0.07), ("exp", 0.2)])
def test_c04_analytic_monte_carlo_consistency(kind, spread):
    cfg = SimConfig(channel=kind, spread=spread, receivers=("tpr", "maxsinr"), snr_db=(0.0, 10.0, 20.0),
                    n_realizations=2000, seed=4)
    t0 = time.perf_counter()
    measured = measure_sinr(cfg)
    elapsed = time.perf_counter() - t0
    analytic = {(p.receiver, p.x): p.value for p in analytic_curve(cfg)}
    diffs = [abs(p.value - analytic[(p.receiver, p.x)]) for p in measured]
    ok = max(diffs) <= 0.5 and elapsed < 600
    detail = f"max |MC - analytic| {max(diffs):.3f} dB over {len(diffs)} points, {elapsed:.0f}s"
    verdict(f"C4 MC vs analytic ({kind}, {spread})", ok, detail)


def test_c05_uniform_gain_bands():
    snrs = np.arange(0, 31, 2.0)
    g07 = [gain_db("uni", 0.07, s) for s in snrs]
    g20 = [gain_db("uni", 0.2, s) for s in snrs]
    ok = (-0.5 <= min(g07) and max(g07) <= 2.5) and (0.0 <= min(g20) and max(g20) <= 4.0)
    detail = (f"spread 0.07 gain {min(g07):.2f}..{max(g07):.2f} dB (band [-0.5, 2.5]); "
              f"spread 0.2 gain {min(g20):.2f}..{max(g20):.2f} dB (band [0, 4])")
    verdict("C5 uniform-channel gain bands over SNR 0-30 dB", ok, detail)


def test_c06_peak_gain_uniform():
    g = gain_db("uni", 0.35, 20.0)
    verdict("C6a peak gain uniform channel (spread 0.35, 20 dB)", abs(g - 3.5) <= 1.0,
            f"gain {g:.2f} dB (target 3.5 +/- 1)")


def test_c06_peak_gain_exponential():
    g = gain_db("exp", 0.35, 20.0)
    verdict("C6b peak gain exponential channel (spread 0.35, 20 dB)", abs(g - 2.5) <= 1.0,
            f"gain {g:.2f} dB (target 2.5 +/- 1)")


def test_c07_upper_bound_proximity():
    limits = {("uni", 0.07): 0.1, ("uni", 0.2): 0.1, ("exp", 0.07): 0.5, ("exp", 0.2): 0.1}
    parts = []
    ok = True
    for (kind, spread), lim in limits.items():
        gaps = []
        for snr in range(0, 31, 5):
            p = params(kind, spread, snr)
            gaps.append(upper_bound_search(p).sinr_db - sinr_db(p, *closed_form_offset(SIGMA, p.scattering)))
        ok &= max(gaps) <= lim
        parts.append(f"{kind} {spread}: {max(gaps):.3f} dB (<= {lim})")
    verdict("C7 closed form vs upper bound gap, SNR 0-30 dB", ok, "; ".join(parts))


def _ber(kind, spread):
    cfg = SimConfig(channel=kind, spread=spread, receivers=("tpr", "maxsinr"), snr_db=tuple(np.arange(0, 31, 2.0)),
                    n_realizations=400, min_bit_errors=10**9, seed=8)
    pts = measure_ber(cfg)
    x = np.array(cfg.snr_db)
    t = [p for p in pts if p.receiver == "tpr"]
    m = [p for p in pts if p.receiver == "maxsinr"]
    return x, t, m


@pytest.mark.slow
@pytest.mark.parametrize("kind,spread,target", [("uni", 0.2, 2.0), ("exp", 0.1, 2.5)])
def test_c08_ber_ordering_and_gain(kind, spread, target):
    x, t, m = _ber(kind, spread)
    order_ok = all(
        mp.meta["ci_low"] <= tp.meta["ci_high"] for xx, tp, mp in zip(x, t, m) if xx >= 10
    )
    strict = all(mp.value <= tp.value for xx, tp, mp in zip(x, t, m) if xx >= 10)
    g = horizontal_gain(x, [p.value for p in t], [p.value for p in m], 20.0)
    gain_ok = math.isfinite(g) and abs(g - target) <= 1.0
    verdict(f"C8a BER ordering ({kind}, {spread})", order_ok,
            f"MaxSINR <= TPR at every Eb/N0 >= 10 dB: {strict}; BER at 20 dB "
            f"{t[10].value:.3e} (TPR) vs {m[10].value:.3e} (MaxSINR)")
    verdict(f"C8b BER horizontal gain at 20 dB ({kind}, {spread})", gain_ok,
            f"gain {g:.2f} dB (target {target} +/- 1); TPR floor {t[-1].value:.3e}, MaxSINR floor {m[-1].value:.3e}")


@pytest.mark.slow
@pytest.mark.parametrize("kind,limit_hi", [("uni", 0.5), ("exp", 0.7)])
def test_c09_robustness(kind, limit_hi):
    cfg = SimConfig(channel=kind, spread=0.1, snr_db=(0.0, 10.0, 20.0, 30.0), n_realizations=1000,
                    estimation_error="uniform-half-span", seed=9)
    pts = robustness_sweep(cfg)
    val = {(p.receiver, p.x): p.value for p in pts}
    gap0 = val[("ub", 0.0)] - val[("maxsinr", 0.0)]
    gap30 = val[("ub", 30.0)] - val[("maxsinr", 30.0)]
    beats_tpr = all(val[("maxsinr", s)] >= val[("tpr", s)] for s in cfg.snr_db)
    ok = gap0 <= 0.1 and gap30 <= limit_hi and beats_tpr
    verdict(f"C9 robustness to delay-spread errors ({kind}, 0.1)", ok,
            f"gap {gap0:.3f} dB at 0 dB (<= 0.1), {gap30:.3f} dB at 30 dB (<= {limit_hi}); MaxSINR >= TPR: {beats_tpr}")


def test_c10_validation_suite():
    t0 = time.perf_counter()
    reports = run_validation()
    elapsed = time.perf_counter() - t0
    n = sum(len(r.checks) for r in reports)
    failed = [c.name for r in reports for c in r.checks if not c.passed]
    ok = not failed and elapsed < 30
    verdict("C10 validation suite", ok, f"{n - len(failed)}/{n} checks pass in {elapsed:.2f}s {failed or ''}")


def test_c11_channel_statistics():
    parts = []
    ok = True
    for kind in ("uni", "exp"):
        spec = ScatteringSpec.from_spread(kind, 0.2, SIGMA)
        reals = [sample_realization(spec, 64, s) for s in np.random.SeedSequence(11).spawn(250)]
        power_err = max(abs(r.power - 1.0) for r in reals)
        tau = np.concatenate([r.tau for r in reals])
        nu = np.concatenate([r.nu for r in reals])
        if kind == "uni":
            u, v = tau / spec.delay, (nu / spec.f_d + 1) / 2
        else:
            u = (1 - np.exp(-tau / spec.delay)) / (1 - math.exp(-10))
            v = 0.5 + np.arcsin(nu / spec.f_d) / math.pi
        counts, _, _ = np.histogram2d(u, v, bins=10, range=[[0, 1], [0, 1]])
        pval = stats.chisquare(counts.ravel()).pvalue
        rng = np.random.default_rng(3)
        x = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        z = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        a, b = 0.7 - 1.1j, -2.3 + 0.4j
        sig = lambda s: SampledSignal(s, 1e-6)  # noqa: E731
        lhs = apply_channel(reals[0], sig(a * x + b * z)).samples
        rhs = a * apply_channel(reals[0], sig(x)).samples + b * apply_channel(reals[0], sig(z)).samples
        lin = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
        ok &= pval > 0.01 and power_err < 1e-12 and lin < 1e-13
        parts.append(f"{kind}: chi2 p {pval:.3f}, power err {power_err:.1e}, linearity {lin:.1e}")
    verdict("C11 channel statistics", ok, "; ".join(parts))
