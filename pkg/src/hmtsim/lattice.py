"""Hexagonal time-frequency lattice, its two rectangular cosets, and symbol grids.

Coset 1 occupies ``(m*T, n*F)``; coset 2 is the same rectangle shifted by
``(T/2, F/2)``.  The union is a hexagonal lattice with density ``2/(T*F)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "LatticeSpec",
    "LatticePoint",
    "SymbolGrid",
    "Constellation",
    "CONSTELLATIONS",
    "get_constellation",
    "lattice_points",
    "density",
    "random_grid",
    "default_sigma",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice spacing ``T`` (s) and ``F`` (Hz) with ``M x N`` indices per coset."""

    T: float
    F: float
    M: int = 1
    N: int = 1

    def __post_init__(self):
        if not (self.T > 0 and self.F > 0):
            raise ValueError("T and F must be positive")
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be >= 1")

    def time_offset(self, coset: int) -> float:
        return 0.0 if coset == 1 else 0.5 * self.T

    def freq_offset(self, coset: int) -> float:
        return 0.0 if coset == 1 else 0.5 * self.F


def default_sigma(lattice: LatticeSpec) -> float:
    """Pulse dispersion ``T / (sqrt(3) F)`` matched to the hexagonal lattice."""
    return lattice.T / (math.sqrt(3.0) * lattice.F)


class LatticePoint(NamedTuple):
    coset: int
    m: int
    n: int
    t_center: float
    f_center: float


def lattice_points(spec: LatticeSpec) -> list[LatticePoint]:
    """All ``2*M*N`` lattice points, coset 1 first, row-major in ``(m, n)``."""
    pts = []
    for coset in (1, 2):
        dt, df = spec.time_offset(coset), spec.freq_offset(coset)
        for m in range(spec.M):
            for n in range(spec.N):
                pts.append(LatticePoint(coset, m, n, m * spec.T + dt, n * spec.F + df))
    return pts


def density(spec: LatticeSpec) -> float:
    """Signalling efficiency in symbols/s/Hz."""
    return 2.0 / (spec.T * spec.F)


@dataclass(frozen=True)
class Constellation:
    """A Gray-labelled unit-power constellation; ``points[k]`` carries the bits of ``k``."""

    name: str
    points: np.ndarray
    bits_per_symbol: int

    def bit_labels(self) -> np.ndarray:
        k = np.arange(self.points.size)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((k[:, None] >> shifts) & 1).astype(np.uint8)

    def decide(self, y) -> np.ndarray:
        """Minimum-distance hard decision; NaN inputs map to index -1 (erasure)."""
        y = np.asarray(y, dtype=complex)
        d = np.abs(y[..., None] - self.points)
        idx = np.argmin(np.nan_to_num(d, nan=np.inf), axis=-1)
        return np.where(np.isnan(y), -1, idx)

    def bit_errors(self, sent, decided) -> int:
        """Bit errors between index arrays; erased decisions count every bit as wrong."""
        sent = np.asarray(sent).ravel()
        decided = np.asarray(decided).ravel()
        erased = decided < 0
        diff = np.bitwise_xor(sent[~erased], decided[~erased])
        popcount = np.unpackbits(diff.astype(np.uint8)[:, None], axis=1).sum()
        return int(popcount + erased.sum() * self.bits_per_symbol)


def _pam_gray(bits: int) -> np.ndarray:
    # Gray-ordered amplitude levels indexed by the bit label of one axis.
    levels = np.arange(-(2**bits) + 1, 2**bits, 2, dtype=float)
    gray = np.arange(2**bits) ^ (np.arange(2**bits) >> 1)
    out = np.empty(2**bits)
    out[gray] = levels
    return out


def _qam(name: str, bits_per_axis: int) -> Constellation:
    pam = _pam_gray(bits_per_axis)
    k = np.arange(4**bits_per_axis)
    pts = pam[k >> bits_per_axis] + 1j * pam[k & (2**bits_per_axis - 1)]
    # QPSK keeps the (1 - 2b) sign convention: label bit 0 -> +1.
    pts = -pts if bits_per_axis == 1 else pts
    pts = pts / math.sqrt(np.mean(np.abs(pts) ** 2))
    return Constellation(name, pts, 2 * bits_per_axis)


CONSTELLATIONS = {"QPSK": _qam("QPSK", 1), "16QAM": _qam("16QAM", 2)}


def get_constellation(name: str) -> Constellation:
    try:
        return CONSTELLATIONS[name.upper()]
    except KeyError:
        raise ValueError(
            f"unsupported constellation {name!r}; expected one of {sorted(CONSTELLATIONS)}"
        ) from None


@dataclass(frozen=True)
class SymbolGrid:
    """Data symbols for both cosets, each an ``M x N`` complex array."""

    coset1: np.ndarray
    coset2: np.ndarray
    constellation: str = "QPSK"
    symbol_power: float = 1.0
    indices: np.ndarray | None = None

    def __post_init__(self):
        c1 = np.asarray(self.coset1, dtype=complex)
        c2 = np.asarray(self.coset2, dtype=complex)
        if c1.ndim != 2 or c1.shape != c2.shape:
            raise ValueError("coset arrays must be 2-D with equal shapes")
        object.__setattr__(self, "coset1", c1)
        object.__setattr__(self, "coset2", c2)

    @property
    def shape(self) -> tuple[int, int]:
        return self.coset1.shape

    def stacked(self) -> np.ndarray:
        """Symbols as a ``(2, M, N)`` array indexed ``[coset - 1, m, n]``."""
        return np.stack([self.coset1, self.coset2])

    @classmethod
    def from_stacked(cls, symbols, **kwargs) -> "SymbolGrid":
        symbols = np.asarray(symbols)
        return cls(symbols[0], symbols[1], **kwargs)

    @classmethod
    def zeros(cls, lattice: LatticeSpec, **kwargs) -> "SymbolGrid":
        z = np.zeros((lattice.M, lattice.N), dtype=complex)
        return cls(z, z.copy(), **kwargs)

    def __add__(self, other: "SymbolGrid") -> "SymbolGrid":
        return SymbolGrid(
            self.coset1 + other.coset1,
            self.coset2 + other.coset2,
            self.constellation,
            self.symbol_power,
        )


def random_grid(
    spec: LatticeSpec, constellation: str = "QPSK", symbol_power: float = 1.0, rng_seed=None
) -> SymbolGrid:
    """I.i.d. uniform constellation symbols scaled to average power ``symbol_power``."""
    if not symbol_power > 0:
        raise ValueError("symbol_power must be positive")
    const = get_constellation(constellation)
    rng = np.random.default_rng(rng_seed)
    idx = rng.integers(0, const.points.size, size=(2, spec.M, spec.N))
    sym = const.points[idx] * math.sqrt(symbol_power)
    return SymbolGrid(sym[0], sym[1], const.name, symbol_power, indices=idx)
