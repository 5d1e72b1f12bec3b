"""HMT transmitter and projection receivers.

The transmitter places ``c^i_{m,n} g^i_{m,n}(t)`` on the hexagonal lattice with

    g^i_{m,n}(t) = g(t - mT - (i-1)T/2) exp(j 2 pi (nF + (i-1)F/2) t)

and a projection receiver estimates each symbol as ``<r, psi^i_{m,n}>`` with

    psi^i_{m,n}(t) = psi(t - mT - (i-1)T/2) exp(j 2 pi (nF + (i-1)F/2) t),
    psi(t) = g(t - delta_t) exp(j 2 pi delta_f t).

The traditional projection receiver (TPR) uses zero offsets; the Max-SINR
receiver shifts its prototype by the closed-form offset of :mod:`hmtsim.sinr`.

Inner products are Riemann sums ``sum r[k] conj(psi[k]) * ts``.  Sampled
pulses are truncated to ``+/- ceil(6 sqrt(sigma) / ts)`` samples around the
sample nearest to their centre.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ScatteringSpec, apply_channel, delay_samples
from .lattice import LatticeSpec, SymbolGrid
from .pulses import TRUNCATION_WIDTHS, PulseSpec, SampledSignal, eval_pulse

__all__ = [
    "ReceiverSpec",
    "HMTModem",
    "ERASURE_THRESHOLD",
    "burst_grid",
    "modulate",
    "demodulate",
    "equalize_genie",
    "effective_gain",
]

#: Effective gains at or below this magnitude are treated as erasures.
ERASURE_THRESHOLD = 1e-6

_MODES = ("tpr", "maxsinr", "manual")


@dataclass(frozen=True)
class ReceiverSpec:
    """Receive prototype selection.

    ``tpr`` uses zero offsets, ``maxsinr`` derives ``delta_t`` from the channel
    delay spread, ``manual`` uses the given offsets.
    """

    mode: str = "tpr"
    delta_t: float = 0.0
    delta_f: float = 0.0

    def __post_init__(self):
        mode = self.mode.lower().replace("-", "")
        if mode not in _MODES:
            raise ValueError(f"unknown receiver mode {self.mode!r}")
        object.__setattr__(self, "mode", mode)

    @classmethod
    def tpr(cls) -> "ReceiverSpec":
        return cls("tpr")

    @classmethod
    def maxsinr(cls) -> "ReceiverSpec":
        return cls("maxsinr")

    @classmethod
    def manual(cls, delta_t: float, delta_f: float = 0.0) -> "ReceiverSpec":
        return cls("manual", delta_t, delta_f)

    def offsets(self, sigma: float | None = None, scattering: ScatteringSpec | None = None):
        """Effective ``(delta_t, delta_f)`` of the receive prototype."""
        if self.mode == "tpr":
            return 0.0, 0.0
        if self.mode == "manual":
            return float(self.delta_t), float(self.delta_f)
        if scattering is None or sigma is None:
            raise ValueError("the Max-SINR receiver needs the pulse sigma and a scattering spec")
        from .sinr import closed_form_offset

        return closed_form_offset(sigma, scattering)


def _half_samples(sigma: float, ts: float) -> int:
    return int(math.ceil(TRUNCATION_WIDTHS * math.sqrt(sigma) / ts - 1e-9))


def burst_grid(lattice: LatticeSpec, sigma: float, ts: float) -> tuple[float, int]:
    """``(t0, n_samples)`` of a burst window covering every truncated pulse.

    One extra symbol period of margin on either side leaves room for receive
    offsets up to ``T``.
    """
    K = _half_samples(sigma, ts) + int(math.ceil(lattice.T / ts))
    last = (lattice.M - 1) * lattice.T + 0.5 * lattice.T
    n = K + int(math.ceil(last / ts)) + K + 1
    return -K * ts, n


class HMTModem:
    """Vectorised modulator/demodulator bound to one sample grid ``t0 + k*ts``.

    Symbol arrays are indexed ``[coset - 1, m, n]``.
    """

    def __init__(self, lattice: LatticeSpec, sigma: float, ts: float = 1e-6, t0=None, n_samples=None):
        PulseSpec(sigma)  # validates sigma
        if not ts > 0:
            raise ValueError("ts must be positive")
        self.lattice = lattice
        self.sigma = float(sigma)
        self.ts = float(ts)
        dt0, dn = burst_grid(lattice, sigma, ts)
        self.t0 = dt0 if t0 is None else float(t0)
        self.n_samples = dn if n_samples is None else int(n_samples)
        self.K = _half_samples(sigma, ts)
        self.W = 2 * self.K + 1
        M, N = lattice.M, lattice.N
        self.centers = np.array(
            [[m * lattice.T + lattice.time_offset(c) for m in range(M)] for c in (1, 2)]
        )
        self.freqs = np.array(
            [[n * lattice.F + lattice.freq_offset(c) for n in range(N)] for c in (1, 2)]
        )
        self._rx_block = functools.lru_cache(maxsize=8)(self._build_rx_block)
        self._tx_blocks = [[self._build_block(i, m, 0.0, 0.0) for m in range(M)] for i in range(2)]

    # -- sample-grid helpers ---------------------------------------------------
    def _k0(self, center: float) -> int:
        return int(round((center - self.t0) / self.ts)) - self.K

    def _window_times(self, k0: int) -> np.ndarray:
        return self.t0 + self.ts * (k0 + np.arange(self.W))

    def _pulse(self, i: int, m: int, delta_t: float):
        c = self.centers[i, m]
        k0 = self._k0(c + delta_t)
        t = self._window_times(k0)
        return k0, t, eval_pulse(PulseSpec(self.sigma, c + delta_t), t)

    def _build_block(self, i: int, m: int, delta_t: float, delta_f: float):
        k0, t, g = self._pulse(i, m, delta_t)
        c = self.centers[i, m]
        block = g * np.exp(2j * math.pi * (self.freqs[i][:, None] * t + delta_f * (t - c)))
        return k0, block

    def _build_rx_block(self, delta_t: float, delta_f: float):
        M = self.lattice.M
        return [[self._build_block(i, m, delta_t, delta_f) for m in range(M)] for i in range(2)]

    def _check_grid(self, r: SampledSignal):
        if r.ts != self.ts or abs(r.t0 - self.t0) > 1e-6 * self.ts:
            raise ValueError("received signal is not on the modem's sample grid")

    # -- transmitter ---------------------------------------------------------
    def modulate(self, symbols) -> SampledSignal:
        """Burst ``x = sum_i sum_{m,n} c^i_{m,n} g^i_{m,n}`` on the modem grid."""
        if isinstance(symbols, SymbolGrid):
            symbols = symbols.stacked()
        symbols = np.asarray(symbols, dtype=complex)
        if symbols.shape != (2, self.lattice.M, self.lattice.N):
            raise ValueError(
                f"symbol array shape {symbols.shape} does not match lattice "
                f"(2, {self.lattice.M}, {self.lattice.N})"
            )
        x = np.zeros(self.n_samples, dtype=complex)
        for i in range(2):
            for m in range(self.lattice.M):
                k0, block = self._tx_blocks[i][m]
                x[k0:k0 + self.W] += symbols[i, m] @ block
        return SampledSignal(x, self.ts, self.t0)

    # -- receiver ------------------------------------------------------------
    def demodulate_all(self, r: SampledSignal, delta_t: float = 0.0, delta_f: float = 0.0) -> np.ndarray:
        """Projections ``<r, psi^i_{m,n}>`` for every lattice position."""
        self._check_grid(r)
        blocks = self._rx_block(float(delta_t), float(delta_f))
        out = np.empty((2, self.lattice.M, self.lattice.N), dtype=complex)
        for i in range(2):
            for m in range(self.lattice.M):
                k0, block = blocks[i][m]
                if k0 < 0 or k0 + self.W > len(r):
                    raise ValueError(
                        f"receive window misses the support of pulse (coset {i + 1}, m={m})"
                    )
                out[i, m] = block.conj() @ r.samples[k0:k0 + self.W]
        return out * self.ts

    def effective_gains(
        self, real: ChannelRealization, delta_t: float = 0.0, delta_f: float = 0.0
    ) -> np.ndarray:
        """``<H[g^i_{m,n}], psi^i_{m,n}>`` for every position, same discretisation as the chain."""
        d = delay_samples(real.tau, self.ts)
        nu = real.nu - delta_f
        lags = np.arange(self.W)
        base = np.exp(2j * math.pi * np.outer(nu, lags * self.ts))
        out = np.empty((2, self.lattice.M, self.lattice.N), dtype=complex)
        for i in range(2):
            phase_n = np.exp(-2j * math.pi * np.outer(self.freqs[i], d * self.ts))
            for m in range(self.lattice.M):
                c = self.centers[i, m]
                k_tx, _, g_tx = self._pulse(i, m, 0.0)
                k_rx, t_rx, g_rx = self._pulse(i, m, delta_t)
                # transmit-pulse sample hitting receive sample k through path p
                o = (k_rx - k_tx) + lags[None, :] - d[:, None]
                valid = (o >= 0) & (o < self.W)
                G = np.where(valid, g_tx[np.clip(o, 0, self.W - 1)], 0.0)
                S = ((G * g_rx) * base).sum(axis=1) * np.exp(2j * math.pi * nu * t_rx[0])
                out[i, m] = np.exp(2j * math.pi * delta_f * c) * (phase_n @ (real.gain * S))
        return out * self.ts

    def interior_mask(self, guard: int = 2) -> np.ndarray:
        """Boolean ``(2, M, N)`` mask excluding ``guard`` symbols at every edge."""
        M, N = self.lattice.M, self.lattice.N
        if 2 * guard >= M or 2 * guard >= N:
            raise ValueError("guard ring leaves no interior symbols")
        mask = np.zeros((2, M, N), dtype=bool)
        mask[:, guard:M - guard, guard:N - guard] = True
        return mask


def modulate(grid: SymbolGrid, lattice: LatticeSpec, pulse_sigma: float, ts: float = 1e-6) -> SampledSignal:
    """Transmit burst for ``grid`` on the default burst window of :func:`burst_grid`."""
    if grid.shape != (lattice.M, lattice.N):
        raise ValueError(f"grid shape {grid.shape} does not match lattice ({lattice.M}, {lattice.N})")
    return HMTModem(lattice, pulse_sigma, ts).modulate(grid.stacked())


def _receive_pulse(lattice, sigma, coset, m, n, delta_t, delta_f, t):
    c = m * lattice.T + lattice.time_offset(coset)
    f = n * lattice.F + lattice.freq_offset(coset)
    g = eval_pulse(PulseSpec(sigma, c + delta_t), t)
    return g * np.exp(2j * math.pi * (delta_f * (t - c) + f * t))


def _offsets(rx, sigma, scattering):
    return rx.offsets(sigma, scattering)


def demodulate(
    r: SampledSignal,
    lattice: LatticeSpec,
    pulse_sigma: float,
    rx: ReceiverSpec,
    coset: int,
    m: int,
    n: int,
    scattering: ScatteringSpec | None = None,
) -> complex:
    """Single projection ``<r, psi^coset_{m,n}>``.

    Raises ``ValueError`` when the truncated receive pulse is not fully inside
    the sampled window of ``r``.
    """
    dt, df = _offsets(rx, pulse_sigma, scattering)
    c = m * lattice.T + lattice.time_offset(coset) + dt
    K = _half_samples(pulse_sigma, r.ts)
    kc = int(round((c - r.t0) / r.ts))
    if kc - K < 0 or kc + K >= len(r):
        raise ValueError("receive window does not cover the projection pulse")
    k = np.arange(kc - K, kc + K + 1)
    t = r.t0 + r.ts * k
    psi = _receive_pulse(lattice, pulse_sigma, coset, m, n, dt, df, t)
    return complex(np.vdot(psi, r.samples[k]) * r.ts)


def equalize_genie(y, eff_gain):
    """One-tap genie equalisation ``y / eff_gain``.

    Gains with ``|eff_gain| <= ERASURE_THRESHOLD`` yield NaN (erased symbol).
    """
    y = np.asarray(y, dtype=complex)
    g = np.asarray(eff_gain, dtype=complex)
    ok = np.abs(g) > ERASURE_THRESHOLD
    out = np.where(ok, y / np.where(ok, g, 1.0), np.nan + 0j)
    return out[()] if out.ndim == 0 else out


def effective_gain(
    real: ChannelRealization,
    lattice: LatticeSpec,
    pulse_sigma: float,
    rx: ReceiverSpec,
    coset: int,
    m: int,
    n: int,
    ts: float = 1e-6,
    scattering: ScatteringSpec | None = None,
) -> complex:
    """``<H[g^coset_{m,n}], psi^coset_{m,n}>`` by transmitting the lone pulse through the chain."""
    scattering = scattering if scattering is not None else real.scattering
    grid = SymbolGrid.zeros(lattice)
    symbols = grid.stacked()
    symbols[coset - 1, m, n] = 1.0
    x = HMTModem(lattice, pulse_sigma, ts).modulate(symbols)
    y = apply_channel(real, x)
    return demodulate(y, lattice, pulse_sigma, rx, coset, m, n, scattering)
