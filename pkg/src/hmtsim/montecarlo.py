"""Monte Carlo link-level experiments: measured SINR, BER, and robustness sweeps.

Every realization derives its own random streams from ``(seed, index)`` via
:class:`numpy.random.SeedSequence`, so results do not depend on evaluation
order and identical configurations reproduce bit-identical output.

Noise scaling: a projection ``<w, psi>`` of white noise with per-sample
variance ``v`` has variance ``v * ts`` for a unit-energy ``psi``.  To make
the projected noise energy equal ``sigma_w2`` (the quantity in the analytic
SINR) the simulated per-sample variance is ``sigma_w2 / ts``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from scipy.stats import binomtest

from .channel import (
    DEFAULT_PATHS,
    ChannelRealization,
    NoiseSpec,
    ScatteringSpec,
    add_noise,
    apply_channel,
    sample_realization,
)
from .lattice import LatticeSpec, default_sigma, density, get_constellation, random_grid
from .modem import HMTModem, equalize_genie
from .pulses import SampledSignal
from .sinr import SinrParams, closed_form_offset, sinr_db, upper_bound_search

__all__ = [
    "SimConfig",
    "CurvePoint",
    "CSV_COLUMNS",
    "RECEIVERS",
    "measure_sinr",
    "measure_ber",
    "robustness_sweep",
    "analytic_curve",
    "ebn0_to_snr_db",
    "horizontal_gain",
    "config_hash",
    "write_csv",
    "curve_csv",
]

RECEIVERS = ("tpr", "maxsinr", "ub")
ESTIMATION_ERRORS = ("none", "uniform-half-span")
CSV_COLUMNS = (
    "x", "metric", "value", "ci", "receiver", "channel_kind", "spread",
    "seed", "config_hash", "delta_t", "delta_f", "n",
)


@dataclass(frozen=True)
class SimConfig:
    """One experiment.  Defaults reproduce the reference link setup.

    ``snr_db`` holds ``sigma_c2/sigma_w2`` points for SINR experiments and
    ``Eb/N0`` points for BER experiments.  ``channel='none'`` selects the
    identity channel.
    """

    channel: str = "uni"
    spread: float = 0.2
    receivers: tuple[str, ...] = ("tpr", "maxsinr")
    snr_db: tuple[float, ...] = (0.0, 10.0, 20.0)
    n_realizations: int = 2000
    n_bursts_per_realization: int = 1
    constellation: str = "QPSK"
    seed: int = 0
    estimation_error: str = "none"
    T: float = 1e-4
    F: float = 2.5e4
    M: int = 20
    N: int = 40
    ts: float = 1e-6
    sigma: float | None = None
    sigma_c2: float = 1.0
    n_paths: int = DEFAULT_PATHS
    guard: int = 2
    min_bit_errors: int = 100

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(r.lower() for r in self.receivers))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if self.channel not in ("uni", "exp", "none"):
            raise ValueError(f"channel must be 'uni', 'exp' or 'none', got {self.channel!r}")
        bad = [r for r in self.receivers if r not in RECEIVERS]
        if bad or not self.receivers:
            raise ValueError(f"receivers must be a non-empty subset of {RECEIVERS}, got {self.receivers}")
        if not self.snr_db:
            raise ValueError("at least one SNR point is required")
        if self.estimation_error not in ESTIMATION_ERRORS:
            raise ValueError(f"estimation_error must be one of {ESTIMATION_ERRORS}")
        if self.channel != "none" and not self.spread > 0:
            raise ValueError("spread factor must be positive")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("pulse sigma must be positive")
        if self.n_realizations < 1 or self.n_bursts_per_realization < 1:
            raise ValueError("realization and burst counts must be >= 1")
        get_constellation(self.constellation)
        LatticeSpec(self.T, self.F, self.M, self.N)

    @property
    def lattice(self) -> LatticeSpec:
        return LatticeSpec(self.T, self.F, self.M, self.N)

    @property
    def pulse_sigma(self) -> float:
        return default_sigma(self.lattice) if self.sigma is None else self.sigma

    @property
    def scattering(self) -> ScatteringSpec | None:
        if self.channel == "none":
            return None
        return ScatteringSpec.from_spread(self.channel, self.spread, self.pulse_sigma)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["receivers"] = list(self.receivers)
        d["snr_db"] = list(self.snr_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("receivers", "snr_db"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def config_hash(cfg: SimConfig) -> str:
    """Stable hash of the configuration (independent of field order)."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CurvePoint:
    x: float
    metric: str  # "sinr_db" | "ber" | "sinr_db_analytic"
    value: float
    ci_halfwidth: float
    receiver: str
    channel_kind: str
    spread: float
    seed: int
    config_hash: str
    delta_t: float = math.nan
    delta_f: float = math.nan
    n: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.ci_halfwidth < 0:
            raise ValueError("ci_halfwidth must be non-negative")
        if self.metric == "ber" and not 0.0 <= self.value <= 1.0:
            raise ValueError("BER must lie in [0, 1]")

    def row(self) -> list:
        return [
            repr(float(self.x)), self.metric, repr(float(self.value)), repr(float(self.ci_halfwidth)),
            self.receiver, self.channel_kind, repr(float(self.spread)), self.seed, self.config_hash,
            repr(float(self.delta_t)), repr(float(self.delta_f)), self.n,
        ]


def curve_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow(p.row())
    return buf.getvalue()


def write_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(curve_csv(points))


def ebn0_to_snr_db(ebn0_db, lattice: LatticeSpec, bits_per_symbol: int) -> float:
    """``sigma_c2/sigma_w2`` in dB for a given ``Eb/N0``.

    Convention: ``Eb = sigma_c2 / (rho * bits_per_symbol)`` with lattice
    density ``rho`` and ``N0 = sigma_w2``.
    """
    return float(ebn0_db) + 10 * math.log10(density(lattice) * bits_per_symbol)


# -- shared per-realization machinery ---------------------------------------------


class _Link:
    """Modem, channel statistics and receiver offsets for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.lattice = cfg.lattice
        self.sigma = cfg.pulse_sigma
        self.scat = cfg.scattering
        self.modem = HMTModem(self.lattice, self.sigma, cfg.ts)
        self.mask = self.modem.interior_mask(cfg.guard)
        self._ub = {}

    def realization(self, seed) -> ChannelRealization:
        if self.scat is None:
            return ChannelRealization.identity()
        return sample_realization(self.scat, self.cfg.n_paths, seed)

    def ub_offsets(self, snr_db: float):
        if snr_db not in self._ub:
            if self.scat is None:
                self._ub[snr_db] = (0.0, 0.0)
            else:
                p = SinrParams.from_snr(self.scat, self.lattice, self.sigma, snr_db, self.cfg.sigma_c2)
                r = upper_bound_search(p)
                self._ub[snr_db] = (r.delta_t, r.delta_f)
        return self._ub[snr_db]

    def maxsinr_offsets(self, est_seed):
        if self.scat is None:
            return 0.0, 0.0
        scat = self.scat
        if self.cfg.estimation_error == "uniform-half-span":
            u = np.random.default_rng(est_seed).uniform(-0.5, 0.5)
            scat = scat.with_delay(scat.delay * (1.0 + u))
        return closed_form_offset(self.sigma, scat)

    def offsets(self, receiver: str, snr_db: float, est_seed):
        if receiver == "tpr":
            return 0.0, 0.0
        if receiver == "ub":
            return self.ub_offsets(snr_db)
        return self.maxsinr_offsets(est_seed)

    def burst(self, real, seeds):
        """Transmit one random burst; returns symbols, received signal and unit noise."""
        sym_seed, noise_seed = seeds
        grid = random_grid(self.lattice, self.cfg.constellation, self.cfg.sigma_c2, sym_seed)
        y = apply_channel(real, self.modem.modulate(grid.stacked()))
        zero = SampledSignal(np.zeros(len(y)), y.ts, y.t0)
        w = add_noise(zero, NoiseSpec(1.0), noise_seed)
        return grid, y, w


def _noise_scale(sigma_w2: float, ts: float) -> float:
    # unit per-sample noise projects to variance ts
    return math.sqrt(sigma_w2 / ts)


def _ratio_ci_db(S, I):
    """Ratio of means in dB and a delta-method 95% half-width in dB."""
    S = np.asarray(S)
    I = np.asarray(I)
    n = S.size
    sm, im = S.mean(), I.mean()
    if n < 2:
        return 10 * math.log10(sm / im), math.inf
    cov = np.cov(np.vstack([S, I]))
    rel_var = (cov[0, 0] / sm**2 + cov[1, 1] / im**2 - 2 * cov[0, 1] / (sm * im)) / n
    half = 1.96 * math.sqrt(max(rel_var, 0.0)) * 10 / math.log(10)
    return 10 * math.log10(sm / im), half


def _point(cfg, chash, x, metric, value, ci, receiver, dt, df, n, **meta):
    return CurvePoint(
        x=float(x), metric=metric, value=float(value), ci_halfwidth=float(ci), receiver=receiver,
        channel_kind=cfg.channel, spread=float(cfg.spread), seed=cfg.seed, config_hash=chash,
        delta_t=float(dt), delta_f=float(df), n=int(n), meta=meta,
    )


def measure_sinr(cfg: SimConfig) -> list[CurvePoint]:
    """Measured SINR per (receiver, SNR) from interior probe symbols.

    Per realization and burst, the desired energy at each interior position is
    ``sigma_c2 |<H[g], psi>|^2`` and the interference-plus-noise energy is
    ``|y - c <H[g], psi>|^2`` (the received projection with the probe's own
    contribution removed).  The SINR is the ratio of realization averages.
    All receivers see the same channels, symbols and noise.
    """
    if cfg.n_realizations < 2:
        raise ValueError("at least 2 realizations are needed for a confidence interval")
    link = _Link(cfg)
    chash = config_hash(cfg)
    n_snr = len(cfg.snr_db)
    sig = {r: np.zeros((cfg.n_realizations, n_snr)) for r in cfg.receivers}
    inf = {r: np.zeros((cfg.n_realizations, n_snr)) for r in cfg.receivers}
    used = {r: np.zeros((cfg.n_realizations, n_snr, 2)) for r in cfg.receivers}
    sigma_w2 = [cfg.sigma_c2 * 10 ** (-s / 10) for s in cfg.snr_db]

    for k, ss in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.n_realizations)):
        chan_seed, est_seed, *burst_seeds = ss.spawn(2 + 2 * cfg.n_bursts_per_realization)
        real = link.realization(chan_seed)
        bursts = [
            link.burst(real, burst_seeds[2 * b:2 * b + 2]) for b in range(cfg.n_bursts_per_realization)
        ]
        for rx in cfg.receivers:
            cache = {}
            for j, snr in enumerate(cfg.snr_db):
                dt, df = link.offsets(rx, snr, est_seed)
                if (dt, df) not in cache:
                    G = link.modem.effective_gains(real, dt, df)[link.mask]
                    parts = []
                    for grid, y, w in bursts:
                        Y = link.modem.demodulate_all(y, dt, df)[link.mask]
                        Wp = link.modem.demodulate_all(w, dt, df)[link.mask]
                        parts.append((Y - grid.stacked()[link.mask] * G, Wp))
                    cache[(dt, df)] = (G, parts)
                G, parts = cache[(dt, df)]
                scale = _noise_scale(sigma_w2[j], cfg.ts)
                sig[rx][k, j] = cfg.sigma_c2 * np.mean(np.abs(G) ** 2)
                inf[rx][k, j] = np.mean([np.mean(np.abs(I + scale * Wp) ** 2) for I, Wp in parts])
                used[rx][k, j] = dt, df

    out = []
    for rx in cfg.receivers:
        for j, snr in enumerate(cfg.snr_db):
            value, ci = _ratio_ci_db(sig[rx][:, j], inf[rx][:, j])
            dt, df = used[rx][:, j].mean(axis=0)
            out.append(_point(
                cfg, chash, snr, "sinr_db", value, ci, rx, dt, df, cfg.n_realizations,
                signal_energy=float(sig[rx][:, j].mean()), interference_energy=float(inf[rx][:, j].mean()),
            ))
    return out


def analytic_curve(cfg: SimConfig, xs=None, vary: str = "snr") -> list[CurvePoint]:
    """Analytic SINR rows for the configured receivers (no estimation error).

    ``vary='snr'`` sweeps ``cfg.snr_db``; ``vary='spread'`` sweeps the spread
    factors in ``xs`` at the first SNR of ``cfg.snr_db``.
    """
    if cfg.channel == "none":
        raise ValueError("analytic SINR needs a scattering channel")
    chash = config_hash(cfg)
    points = cfg.snr_db if vary == "snr" else tuple(xs)
    rows = {rx: [] for rx in cfg.receivers}
    for x in points:
        c = cfg if vary == "snr" else replace(cfg, spread=float(x))
        snr = x if vary == "snr" else cfg.snr_db[0]
        p = SinrParams.from_snr(c.scattering, c.lattice, c.pulse_sigma, snr, c.sigma_c2)
        for rx in cfg.receivers:
            if rx == "tpr":
                dt, df, val = 0.0, 0.0, sinr_db(p, 0.0, 0.0)
            elif rx == "maxsinr":
                dt, df = closed_form_offset(c.pulse_sigma, c.scattering)
                val = sinr_db(p, dt, df)
            else:
                r = upper_bound_search(p)
                dt, df, val = r.delta_t, r.delta_f, r.sinr_db
            rows[rx].append(_point(c, chash, x, "sinr_db_analytic", val, 0.0, rx, dt, df, 0))
    out = [pt for rx in cfg.receivers for pt in rows[rx]]
    return out


def measure_ber(cfg: SimConfig) -> list[CurvePoint]:
    """Uncoded BER per (receiver, Eb/N0) with genie one-tap equalisation.

    Chain per burst: modulate, channel, noise, project, divide by the known
    effective gain, minimum-distance decision.  Interior symbols only.
    ``cfg.snr_db`` holds Eb/N0 values; see :func:`ebn0_to_snr_db`.  Bursts are
    drawn until every point has ``min_bit_errors`` errors or the
    ``n_realizations * n_bursts_per_realization`` cap is reached.
    """
    link = _Link(cfg)
    chash = config_hash(cfg)
    const = get_constellation(cfg.constellation)
    bps = const.bits_per_symbol
    snr_db = [ebn0_to_snr_db(e, link.lattice, bps) for e in cfg.snr_db]
    sigma_w2 = [cfg.sigma_c2 * 10 ** (-s / 10) for s in snr_db]
    errors = {r: np.zeros(len(snr_db), dtype=np.int64) for r in cfg.receivers}
    bits = {r: np.zeros(len(snr_db), dtype=np.int64) for r in cfg.receivers}
    used = {r: np.zeros((len(snr_db), 2)) for r in cfg.receivers}
    n_used = 0
    for ss in np.random.SeedSequence(cfg.seed).spawn(cfg.n_realizations):
        chan_seed, est_seed, *burst_seeds = ss.spawn(2 + 2 * cfg.n_bursts_per_realization)
        real = link.realization(chan_seed)
        n_used += 1
        for b in range(cfg.n_bursts_per_realization):
            grid, y, w = link.burst(real, burst_seeds[2 * b:2 * b + 2])
            sent = grid.indices[link.mask]
            for rx in cfg.receivers:
                cache = {}
                for j, snr in enumerate(snr_db):
                    dt, df = link.offsets(rx, snr, est_seed)
                    if (dt, df) not in cache:
                        cache[(dt, df)] = (
                            link.modem.demodulate_all(y, dt, df)[link.mask],
                            link.modem.demodulate_all(w, dt, df)[link.mask],
                            link.modem.effective_gains(real, dt, df)[link.mask],
                        )
                    Y, Wp, G = cache[(dt, df)]
                    z = equalize_genie(Y + _noise_scale(sigma_w2[j], cfg.ts) * Wp, G)
                    z = z / math.sqrt(cfg.sigma_c2)
                    errors[rx][j] += const.bit_errors(sent, const.decide(z))
                    bits[rx][j] += sent.size * bps
                    used[rx][j] += (dt, df)
        if all(np.all(e >= cfg.min_bit_errors) for e in errors.values()):
            break

    out = []
    n_bursts = n_used * cfg.n_bursts_per_realization
    for rx in cfg.receivers:
        for j, ebn0 in enumerate(cfg.snr_db):
            k, n = int(errors[rx][j]), int(bits[rx][j])
            ci = binomtest(k, n).proportion_ci(0.95, method="wilson")
            dt, df = used[rx][j] / n_bursts
            out.append(_point(
                cfg, chash, ebn0, "ber", k / n, 0.5 * (ci.high - ci.low), rx, dt, df, n,
                ci_low=ci.low, ci_high=ci.high, bit_errors=k, snr_db=snr_db[j],
            ))
    return out


def robustness_sweep(cfg: SimConfig) -> list[CurvePoint]:
    """Measured SINR of the Max-SINR receiver with delay-spread estimation errors.

    The Max-SINR offset of each realization is computed from
    ``delay_hat = delay * (1 + u)``, ``u ~ U(-1/2, 1/2)``; the perfect-knowledge
    upper-bound receiver and TPR are measured on the same realizations.  With
    ``estimation_error='none'`` the Max-SINR rows equal those of
    :func:`measure_sinr`.
    """
    return measure_sinr(replace(cfg, receivers=("ub", "maxsinr", "tpr")))


def horizontal_gain(x, ber_ref, ber_test, at: float) -> float:
    """SNR shift (dB) by which ``ber_test`` reaches ``ber_ref(at)`` earlier.

    Interpolates ``log10(BER)`` linearly in ``x``; NaN when ``ber_test`` never
    crosses the reference level inside the sampled range.
    """
    x = np.asarray(x, float)
    lr = np.log10(np.maximum(np.asarray(ber_ref, float), 1e-300))
    lt = np.log10(np.maximum(np.asarray(ber_test, float), 1e-300))
    target = np.interp(at, x, lr)
    for i in range(len(x) - 1):
        a, b = lt[i], lt[i + 1]
        if (a - target) * (b - target) <= 0 and a != b:
            xc = x[i] + (target - a) / (b - a) * (x[i + 1] - x[i])
            return float(at - xc)
    return math.nan
