"""Hexagonal multicarrier transmission link simulator with Max-SINR projection receivers."""

__version__ = "0.1.0"

from .channel import ChannelRealization, NoiseSpec, ScatteringSpec, apply_channel, sample_realization
from .lattice import LatticeSpec, SymbolGrid, default_sigma, random_grid
from .modem import HMTModem, ReceiverSpec, demodulate, effective_gain, modulate
from .montecarlo import CurvePoint, SimConfig, measure_ber, measure_sinr, robustness_sweep
from .pulses import PulseSpec, SampledSignal, ambiguity_closed, cross_ambiguity
from .sinr import SinrParams, closed_form_offset, sinr_db, upper_bound_search

__all__ = [
    "ChannelRealization",
    "CurvePoint",
    "HMTModem",
    "LatticeSpec",
    "NoiseSpec",
    "PulseSpec",
    "ReceiverSpec",
    "SampledSignal",
    "ScatteringSpec",
    "SimConfig",
    "SinrParams",
    "SymbolGrid",
    "ambiguity_closed",
    "apply_channel",
    "closed_form_offset",
    "cross_ambiguity",
    "default_sigma",
    "demodulate",
    "effective_gain",
    "measure_ber",
    "measure_sinr",
    "modulate",
    "random_grid",
    "robustness_sweep",
    "sample_realization",
    "sinr_db",
    "upper_bound_search",
]
