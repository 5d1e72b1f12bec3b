"""Self-contained numerical validation suite behind ``hmtsim validate``."""
from __future__ import annotations

import math

import numpy as np

from .channel import ScatteringSpec
from .lattice import LatticeSpec, default_sigma
from .pulses import ambiguity_closed, ambiguity_numeric
from .report import ValidationReport
from .sinr import SinrParams, verify_appendix_a, verify_appendix_b

__all__ = ["ambiguity_oracle_report", "run_validation"]

AMBIGUITY_TOL = 1e-5


def ambiguity_oracle_report(
    n_draws: int = 100, seed: int = 0, sigma0: float | None = None, tol: float = AMBIGUITY_TOL
) -> ValidationReport:
    """Closed-form ambiguity function against a Riemann-sum integral.

    ``sigma`` is drawn log-uniformly over a decade around ``sigma0``; delay and
    Doppler cover two pulse widths in each direction.
    """
    sigma0 = default_sigma(LatticeSpec(1e-4, 2.5e4)) if sigma0 is None else sigma0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_draws):
        sigma = sigma0 * 10 ** rng.uniform(-0.5, 0.5)
        tau = rng.uniform(-2, 2) * math.sqrt(sigma)
        nu = rng.uniform(-2, 2) / math.sqrt(sigma)
        err = abs(complex(ambiguity_closed(sigma, tau, nu)) - ambiguity_numeric(sigma, tau, nu))
        worst = max(worst, err)
    rep = ValidationReport("ambiguity function: closed form vs numeric integration")
    rep.add("max_abs_error", worst <= tol, worst, tol, f"{n_draws} random (sigma, tau, nu) draws")
    return rep


def run_validation(
    sigma: float | None = None, spread_uni: float = 0.1, spread_exp: float = 0.1, snr_db: float = 20.0
) -> list[ValidationReport]:
    """Ambiguity oracle plus both offset-derivation reports at the reference lattice."""
    lattice = LatticeSpec(1e-4, 2.5e4)
    sigma = default_sigma(lattice) if sigma is None else float(sigma)
    if not sigma > 0:
        raise ValueError("pulse sigma must be positive")
    reports = [ambiguity_oracle_report(sigma0=sigma)]
    for kind, spread, verify in (("uni", spread_uni, verify_appendix_a), ("exp", spread_exp, verify_appendix_b)):
        scat = ScatteringSpec.from_spread(kind, spread, sigma)
        p = SinrParams.from_snr(scat, lattice, sigma, snr_db)
        reports.append(verify(p))
    return reports
