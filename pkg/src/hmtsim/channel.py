"""WSSUS doubly dispersive channel: scattering functions, path realizations, AWGN.

Two scattering families are supported:

``uni``
    uniform delay on ``(0, tau_max]`` and uniform Doppler on ``(-f_d, f_d)``,
    density ``1 / (2 tau_max f_d)``.
``exp``
    exponential power delay profile with RMS spread ``tau_rms`` and a U-shaped
    (Jakes) Doppler spectrum,
    density ``exp(-tau/tau_rms) / (pi tau_rms f_d sqrt(1 - (nu/f_d)^2))``.

A realization is a finite set of delay-Doppler paths whose gains are
normalised so that ``sum |h_p|^2 == 1`` exactly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pulses import SampledSignal

__all__ = [
    "ScatteringSpec",
    "ChannelRealization",
    "NoiseSpec",
    "REALIZATION_SCHEMA",
    "DEFAULT_PATHS",
    "EXP_DELAY_TRUNCATION",
    "scattering_density",
    "sample_realization",
    "delay_samples",
    "apply_channel",
    "add_noise",
]

REALIZATION_SCHEMA = "hmtsim.channel-realization/1"
DEFAULT_PATHS = 64
#: Exponential delays beyond this many ``tau_rms`` are redrawn.
EXP_DELAY_TRUNCATION = 10.0

_KINDS = ("uni", "exp")


def _norm_kind(kind: str) -> str:
    k = kind.lower().replace("dd-", "")
    if k not in _KINDS:
        raise ValueError(f"unknown scattering kind {kind!r}; expected 'uni' or 'exp'")
    return k


@dataclass(frozen=True)
class ScatteringSpec:
    """Scattering function of a DD channel.

    ``delay`` is ``tau_max`` for ``kind='uni'`` and ``tau_rms`` for
    ``kind='exp'``; ``f_d`` is the maximum Doppler frequency.
    """

    kind: str
    delay: float
    f_d: float

    def __post_init__(self):
        object.__setattr__(self, "kind", _norm_kind(self.kind))
        if not (self.delay > 0 and self.f_d > 0):
            raise ValueError("delay spread and Doppler must be positive")

    @classmethod
    def uni(cls, tau_max: float, f_d: float) -> "ScatteringSpec":
        return cls("uni", tau_max, f_d)

    @classmethod
    def exp(cls, tau_rms: float, f_d: float) -> "ScatteringSpec":
        return cls("exp", tau_rms, f_d)

    @classmethod
    def from_spread(cls, kind: str, spread: float, sigma: float) -> "ScatteringSpec":
        """Channel with spread factor ``delay*f_d == spread`` matched to the pulse.

        The split satisfies ``delay / f_d == sigma`` (pulse dispersion matched
        to the channel's delay/Doppler aspect ratio), giving
        ``delay = sqrt(sigma*spread)`` and ``f_d = sqrt(spread/sigma)``.
        """
        if not spread > 0:
            raise ValueError("spread factor must be positive")
        return cls(kind, math.sqrt(sigma * spread), math.sqrt(spread / sigma))

    @property
    def tau_max(self) -> float:
        if self.kind != "uni":
            raise AttributeError("tau_max is only defined for the uniform profile")
        return self.delay

    @property
    def tau_rms(self) -> float:
        if self.kind != "exp":
            raise AttributeError("tau_rms is only defined for the exponential profile")
        return self.delay

    @property
    def spread_factor(self) -> float:
        return self.delay * self.f_d

    def with_delay(self, delay: float) -> "ScatteringSpec":
        return ScatteringSpec(self.kind, delay, self.f_d)

    def to_dict(self) -> dict:
        key = "tau_max" if self.kind == "uni" else "tau_rms"
        return {"kind": self.kind, key: self.delay, "f_d": self.f_d}

    @classmethod
    def from_dict(cls, d: dict) -> "ScatteringSpec":
        kind = _norm_kind(d["kind"])
        delay = d["tau_max"] if kind == "uni" else d["tau_rms"]
        return cls(kind, float(delay), float(d["f_d"]))


@dataclass(frozen=True)
class NoiseSpec:
    """Circular complex AWGN with variance ``sigma_w2`` per sample."""

    sigma_w2: float

    def __post_init__(self):
        if not self.sigma_w2 >= 0:
            raise ValueError("noise variance must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    """Discrete delay-Doppler paths ``(tau_p, nu_p, h_p)``."""

    tau: np.ndarray
    nu: np.ndarray
    gain: np.ndarray
    scattering: ScatteringSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        gain = np.atleast_1d(np.asarray(self.gain, dtype=complex))
        if not (tau.shape == nu.shape == gain.shape) or tau.ndim != 1 or tau.size == 0:
            raise ValueError("paths need equal-length, non-empty tau/nu/gain arrays")
        if np.any(tau < 0):
            raise ValueError("path delays must be non-negative")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "gain", gain)

    @classmethod
    def identity(cls) -> "ChannelRealization":
        return cls([0.0], [0.0], [1.0])

    @property
    def n_paths(self) -> int:
        return self.tau.size

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.gain) ** 2))

    def to_json(self) -> str:
        doc = {
            "schema": REALIZATION_SCHEMA,
            "scattering": None if self.scattering is None else self.scattering.to_dict(),
            "paths": [
                {"tau": float(t), "nu": float(v), "re": float(h.real), "im": float(h.imag)}
                for t, v, h in zip(self.tau, self.nu, self.gain)
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChannelRealization":
        doc = json.loads(text)
        if doc.get("schema") != REALIZATION_SCHEMA:
            raise ValueError(f"unsupported realization schema {doc.get('schema')!r}")
        paths = doc["paths"]
        scat = doc.get("scattering")
        return cls(
            [p["tau"] for p in paths],
            [p["nu"] for p in paths],
            [complex(p["re"], p["im"]) for p in paths],
            None if scat is None else ScatteringSpec.from_dict(scat),
        )


def scattering_density(spec: ScatteringSpec, tau, nu):
    """Scattering function ``S_H(tau, nu)`` in 1/(s Hz); zero outside the support."""
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    inside_nu = np.abs(nu) < spec.f_d
    if spec.kind == "uni":
        inside = (tau > 0) & (tau <= spec.delay) & inside_nu
        out = np.where(inside, 1.0 / (2.0 * spec.delay * spec.f_d), 0.0)
    else:
        inside = (tau > 0) & inside_nu
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(inside_nu, nu / spec.f_d, 0.0)
            val = np.exp(-tau / spec.delay) / (
                math.pi * spec.delay * spec.f_d * np.sqrt(1.0 - r * r)
            )
        out = np.where(inside, val, 0.0)
    return out[()] if out.ndim == 0 else out


def _sample_delays(spec, n, rng):
    if spec.kind == "uni":
        # 1 - U[0, 1) lies in (0, 1]
        return spec.delay * (1.0 - rng.random(n))
    tau = rng.exponential(spec.delay, n)
    limit = EXP_DELAY_TRUNCATION * spec.delay
    bad = tau > limit
    while bad.any():
        tau[bad] = rng.exponential(spec.delay, bad.sum())
        bad = tau > limit
    return tau


def _sample_dopplers(spec, n, rng):
    u = rng.random(n)
    if spec.kind == "uni":
        nu = spec.f_d * (2.0 * u - 1.0)
    else:
        # inverse CDF of the U-shaped (arcsine) density
        nu = spec.f_d * np.sin(math.pi * (u - 0.5))
    # keep the open interval |nu| < f_d
    return np.clip(nu, -np.nextafter(spec.f_d, 0), np.nextafter(spec.f_d, 0))


def sample_realization(
    spec: ScatteringSpec, n_paths: int = DEFAULT_PATHS, rng_seed=None
) -> ChannelRealization:
    """Draw ``n_paths`` paths from the scattering marginals with random phases."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    rng = np.random.default_rng(rng_seed)
    tau = _sample_delays(spec, n_paths, rng)
    nu = _sample_dopplers(spec, n_paths, rng)
    phase = rng.uniform(0.0, 2.0 * math.pi, n_paths)
    h = np.exp(1j * phase) / math.sqrt(n_paths)
    h /= math.sqrt(np.sum(np.abs(h) ** 2))
    return ChannelRealization(tau, nu, h, spec)


def delay_samples(tau, ts: float) -> np.ndarray:
    """Path delays rounded to the nearest whole sample."""
    return np.rint(np.asarray(tau, dtype=float) / ts).astype(int)


def apply_channel(real: ChannelRealization, x: SampledSignal) -> SampledSignal:
    """``y(t) = sum_p h_p x(t - tau_p) exp(j 2 pi nu_p t)`` with sample-rounded delays.

    The output starts at ``x.t0`` and is longer by the largest path delay.
    The Doppler ramp uses the absolute time of each output sample.
    """
    if len(x) == 0:
        raise ValueError("cannot apply a channel to an empty signal")
    d = delay_samples(real.tau, x.ts)
    n_out = len(x) + int(d.max())
    t = x.t0 + x.ts * np.arange(n_out)
    y = np.zeros(n_out, dtype=complex)
    for dp, nup, hp in zip(d, real.nu, real.gain):
        seg = slice(dp, dp + len(x))
        y[seg] += hp * x.samples * np.exp(2j * math.pi * nup * t[seg])
    return SampledSignal(y, x.ts, x.t0)


def add_noise(x: SampledSignal, noise: NoiseSpec, rng_seed=None) -> SampledSignal:
    """Add circular complex Gaussian noise of variance ``noise.sigma_w2`` per sample."""
    if noise.sigma_w2 == 0:
        return SampledSignal(x.samples.copy(), x.ts, x.t0)
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal((2, len(x)))
    w = (w[0] + 1j * w[1]) * math.sqrt(noise.sigma_w2 / 2.0)
    return SampledSignal(x.samples + w, x.ts, x.t0)
