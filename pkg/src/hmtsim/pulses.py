"""Gaussian prototype pulses and their ambiguity functions.

The transmit prototype is the unit-energy Gaussian window

    g(t) = (2/sigma)**(1/4) * exp(-pi * t**2 / sigma)

and a receive prototype carries a timing and a frequency offset,
``psi(t) = g(t - delta_t) * exp(j*2*pi*delta_f*t)``.

The auto-ambiguity function used throughout the package is

    A_g(tau, nu) = exp(-pi/2 * (tau**2/sigma + sigma*nu**2)) * exp(-j*pi*tau*nu)

Note the ``sigma * nu**2`` term in the frequency direction. It is the
dimensionally consistent form, the one every SINR expression relies on
(frequency factors ``exp(-sigma*pi*(nu - delta_f)**2)``), and the one the
numeric cross-correlation reproduces. A bare ``nu**2`` exponent is a
misprint seen in some write-ups of this result.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TRUNCATION_WIDTHS",
    "PulseSpec",
    "SampledSignal",
    "eval_pulse",
    "sample_pulse",
    "ambiguity_closed",
    "cross_ambiguity",
    "ambiguity_numeric",
    "cross_ambiguity_numeric",
]

#: Sampled pulses are truncated at +/- this many sqrt(sigma) around their
#: centre; the amplitude there is below exp(-36*pi).
TRUNCATION_WIDTHS = 6.0


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian prototype with dispersion ``sigma`` (s^2) and receive offsets."""

    sigma: float
    delta_t: float = 0.0
    delta_f: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def halfwidth(self) -> float:
        """Truncation half-width in seconds."""
        return TRUNCATION_WIDTHS * math.sqrt(self.sigma)


@dataclass(frozen=True)
class SampledSignal:
    """Complex baseband samples on the grid ``t0 + k*ts``."""

    samples: np.ndarray
    ts: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("a sampled signal needs a non-empty 1-D sample array")
        if not self.ts > 0:
            raise ValueError(f"ts must be positive, got {self.ts!r}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.ts * np.arange(self.samples.size)

    @property
    def energy(self) -> float:
        """Riemann-sum energy ``sum |x|^2 * ts``."""
        return float(np.sum(np.abs(self.samples) ** 2) * self.ts)

    def inner(self, other: "SampledSignal") -> complex:
        """``<self, other> = sum self * conj(other) * ts`` on a shared grid."""
        if other.ts != self.ts or other.t0 != self.t0 or len(other) != len(self):
            raise ValueError("inner product needs signals on the same sample grid")
        return complex(np.vdot(other.samples, self.samples) * self.ts)


def eval_pulse(spec: PulseSpec, t):
    """Real amplitude ``g(t - delta_t)``; the ``delta_f`` modulation is not applied."""
    t = np.asarray(t, dtype=float)
    u = t - spec.delta_t
    return (2.0 / spec.sigma) ** 0.25 * np.exp(-math.pi * u * u / spec.sigma)


def sample_pulse(spec: PulseSpec, ts: float, n_samples: int, t0: float = 0.0) -> SampledSignal:
    """Sample ``g(t - delta_t) * exp(j*2*pi*delta_f*t)`` at ``t0 + k*ts``."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    t = t0 + ts * np.arange(n_samples)
    half = 3.0 * math.sqrt(spec.sigma)
    if n_samples > 1 and (t[0] > spec.delta_t - half or t[-1] < spec.delta_t + half):
        warnings.warn(
            "sampling window covers less than 6*sqrt(sigma) around the pulse centre",
            RuntimeWarning,
            stacklevel=2,
        )
    x = eval_pulse(spec, t).astype(complex)
    if spec.delta_f != 0.0:
        x *= np.exp(2j * math.pi * spec.delta_f * t)
    return SampledSignal(x, ts, t0)


def ambiguity_closed(sigma: float, tau, nu):
    """Closed-form Gaussian auto-ambiguity ``int g(t) g*(t - tau) exp(-j 2 pi nu t) dt``."""
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    mag = np.exp(-0.5 * math.pi * (tau * tau / sigma + sigma * nu * nu))
    out = mag * np.exp(-1j * math.pi * tau * nu)
    return out[()] if out.ndim == 0 else out


def cross_ambiguity(sigma: float, delta_t: float, delta_f: float, tau, nu):
    """Cross-ambiguity of the offset receive pulse against the transmit pulse.

    Defined by the inner product

        A_{g,psi}(tau, nu) = int psi(t) g*(t - tau) exp(-j 2 pi nu t) dt
                           = <psi, g_{tau,nu}>,   g_{tau,nu}(t) = g(t - tau) e^{j 2 pi nu t}

    which reduces to :func:`ambiguity_closed` for zero offsets.  Closed form:

        exp(-pi/2 ((tau - dt)^2/sigma + sigma (nu - df)^2)) * exp(-j pi (nu - df)(tau + dt))

    The projection of a single channel path ``h * g(t - tau) e^{j 2 pi nu t}``
    onto ``psi`` is therefore ``h * conj(cross_ambiguity(...))``; only the
    magnitude enters the SINR expressions.
    """
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    a = tau - delta_t
    b = nu - delta_f
    mag = np.exp(-0.5 * math.pi * (a * a / sigma + sigma * b * b))
    out = mag * np.exp(-1j * math.pi * b * (tau + delta_t))
    return out[()] if out.ndim == 0 else out


def _grid(sigma, span_lo, span_hi, oversample):
    step = math.sqrt(sigma) / oversample
    lo = span_lo - TRUNCATION_WIDTHS * math.sqrt(sigma)
    hi = span_hi + TRUNCATION_WIDTHS * math.sqrt(sigma)
    n = int(math.ceil((hi - lo) / step)) + 1
    return lo + step * np.arange(n), step


def cross_ambiguity_numeric(
    sigma: float, delta_t: float, delta_f: float, tau: float, nu: float, oversample: int = 20
) -> complex:
    """Riemann-sum evaluation of ``int psi(t) g*(t - tau) exp(-j 2 pi nu t) dt``.

    ``oversample`` is the number of samples per ``sqrt(sigma)``.
    """
    t, dt = _grid(sigma, min(0.0, tau, delta_t), max(0.0, tau, delta_t), oversample)
    g = PulseSpec(sigma)
    psi = eval_pulse(g, t - delta_t) * np.exp(2j * math.pi * delta_f * t)
    integrand = psi * eval_pulse(g, t - tau) * np.exp(-2j * math.pi * nu * t)
    return complex(np.sum(integrand) * dt)


def ambiguity_numeric(sigma: float, tau: float, nu: float, oversample: int = 20) -> complex:
    """Riemann-sum evaluation of the auto-ambiguity at one ``(tau, nu)``."""
    return cross_ambiguity_numeric(sigma, 0.0, 0.0, tau, nu, oversample)
