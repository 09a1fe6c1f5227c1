"""Large-system unit-power SIR and spectral efficiency.

A user received at power ``p`` sees SIR ``p * eta`` in the limit, where
``eta`` depends on the receiver, the traffic demand ``alpha``, the noise
variance and the loaded power distribution.  Capacities are for real-valued
signalling (factor 1/2) and in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ModelDomainError, NumericalError
from .model import PowerProfile, Receiver, SystemConfig, profile_moments, require_valid

DEFAULT_TOL = 1e-12
BRACKET_FLOOR = 1e-15
MAX_BISECTIONS = 200


class Regime(str, Enum):
    UNDERLOADED = "underloaded"
    OVERLOADED = "overloaded"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class SirSolution:
    eta: float
    receiver: Receiver
    iterations: int = 0
    residual: float = 0.0
    regime: Regime = Regime.CLOSED_FORM
    # set when the formula used is only derived for Gaussian chips
    assumes_gaussian_chips: bool = False


@dataclass(frozen=True)
class ClassMetrics:
    index: int
    power: float
    fraction: float
    tx_prob: float
    link_capacity: float
    coded_rate: float
    eb_n0: float
    eb_n0_db: float


@dataclass(frozen=True)
class CapacityReport:
    eta: float
    load: float
    spectral_efficiency: float
    per_class: tuple[ClassMetrics, ...]
    sir: SirSolution
    alpha: float


def mmse_residual(eta: float, alpha: float, sigma2: float, profile: PowerProfile) -> float:
    """1/eta - sigma^2 - alpha E[theta p / (1 + p eta)]."""
    q, t, p = profile.fractions, profile.tx_probs, profile.powers
    return 1.0 / eta - sigma2 - alpha * math.fsum(q * t * p / (1.0 + p * eta))


def solve_sir_mmse(alpha: float, sigma2: float, profile: PowerProfile, tol: float = DEFAULT_TOL) -> SirSolution:
    """Unit-power SIR of the MMSE receiver by bisection.

    The residual is strictly decreasing in eta on (0, 1/sigma^2], positive
    near zero and non-positive at 1/sigma^2, so the sign change is unique.
    Iteration stops once ``|residual| <= tol``.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")

    def f(e):
        return mmse_residual(e, alpha, sigma2, profile)

    regime = Regime.UNDERLOADED if alpha * profile_moments(profile)[0] <= 1.0 else Regime.OVERLOADED
    lo, hi = BRACKET_FLOOR, 1.0 / sigma2
    f_hi = f(hi)
    if abs(f_hi) <= tol:
        return SirSolution(hi, Receiver.MMSE, 0, abs(f_hi), regime)
    f_lo = f(lo)
    if f_lo < 0:
        raise NumericalError(f"MMSE SIR root lies below {BRACKET_FLOOR}", bracket=(lo, hi))

    best, best_res = hi, abs(f_hi)
    for it in range(1, MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if abs(f_mid) < best_res:
            best, best_res = mid, abs(f_mid)
        if best_res <= tol:
            return SirSolution(best, Receiver.MMSE, it, best_res, regime)
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    raise NumericalError(
        f"MMSE SIR bisection stalled with residual {best_res:.3g} > tol {tol:.3g} "
        f"(1/eta ~ {1.0 / best:.3g}; a looser tol may be needed)", bracket=(lo, hi)
    )


def sir_decorrelator(alpha: float, sigma2: float, profile: PowerProfile) -> SirSolution:
    """Unit-power SIR of the decorrelator.

    Underloaded (alpha E[theta] <= 1): ``(1 - alpha E[theta]) / sigma^2``.
    Overloaded is only available for a single class (equal powers) and the
    closed form there is derived for Gaussian chips.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    mean_theta, _ = profile_moments(profile)
    load = alpha * mean_theta
    if load <= 1.0:
        return SirSolution(max(0.0, (1.0 - load) / sigma2), Receiver.DECORRELATOR, regime=Regime.UNDERLOADED)
    if len(profile) != 1:
        raise ModelDomainError(
            f"decorrelator is overloaded (load {load:.6g} > 1); the overloaded SIR is known only "
            "for equal power (single class) with Gaussian chips"
        )
    p = profile.classes[0].power
    at = alpha * profile.classes[0].tx_prob
    eta = (at - 1.0) / (at * sigma2 + (at - 1.0) ** 2 * p)
    return SirSolution(eta, Receiver.DECORRELATOR, regime=Regime.OVERLOADED, assumes_gaussian_chips=True)


def sir_mf(alpha: float, sigma2: float, profile: PowerProfile) -> SirSolution:
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    _, mean_theta_p = profile_moments(profile)
    return SirSolution(1.0 / (sigma2 + alpha * mean_theta_p), Receiver.MF)


def solve_sir(config: SystemConfig, profile: PowerProfile, tol: float = DEFAULT_TOL) -> SirSolution:
    """Dispatch on ``config.receiver``."""
    if config.receiver is Receiver.MMSE:
        return solve_sir_mmse(config.alpha, config.noise_var, profile, tol)
    if config.receiver is Receiver.DECORRELATOR:
        return sir_decorrelator(config.alpha, config.noise_var, profile)
    return sir_mf(config.alpha, config.noise_var, profile)


def coded_rate(p: float, eta: float) -> float:
    """Link capacity of a transmitting user, (1/2) log2(1 + p eta) bits/symbol."""
    return 0.5 * math.log1p(p * eta) / math.log(2.0)


def link_capacity(p: float, theta: float, eta: float) -> float:
    """Capacity of the link channel including the MAC, theta * R(p)."""
    return theta * coded_rate(p, eta)


def eb_n0(p: float, sigma2: float, eta: float) -> tuple[float, float]:
    """Minimum Eb/N0 for reliable communication, as (linear, dB).

    Independent of the transmission probability.
    """
    if not (p > 0 and sigma2 > 0 and eta > 0):
        raise ValueError("eb_n0 requires p, sigma2, eta > 0")
    bits = math.log1p(p * eta) / math.log(2.0)
    if bits == 0.0:
        raise NumericalError(f"log2(1 + p*eta) underflows for p*eta = {p * eta:.3g}")
    value = p / (sigma2 * bits)
    if not math.isfinite(value):
        raise NumericalError(f"Eb/N0 overflows for p*eta = {p * eta:.3g}")
    return value, 10.0 * math.log10(value)


def spectral_efficiency(alpha: float, profile: PowerProfile, eta: float) -> float:
    """System spectral efficiency (alpha/2) E[theta log2(1 + p eta)] in bits/s/Hz."""
    if eta < 0:
        raise ValueError("eta must be non-negative")
    q, t, p = profile.fractions, profile.tx_probs, profile.powers
    return 0.5 * alpha * math.fsum(q * t * np.log1p(p * eta)) / math.log(2.0)


def capacity_report(config: SystemConfig, profile: PowerProfile, tol: float = DEFAULT_TOL) -> CapacityReport:
    require_valid(profile)
    sol = solve_sir(config, profile, tol)
    per_class = []
    for i, c in enumerate(profile.classes):
        try:
            ebn0, ebn0_db = eb_n0(c.power, config.noise_var, sol.eta)
        except (ValueError, NumericalError):
            ebn0, ebn0_db = math.inf, math.inf
        per_class.append(ClassMetrics(
            index=i,
            power=c.power,
            fraction=c.fraction,
            tx_prob=c.tx_prob,
            link_capacity=link_capacity(c.power, c.tx_prob, sol.eta),
            coded_rate=coded_rate(c.power, sol.eta),
            eb_n0=ebn0,
            eb_n0_db=ebn0_db,
        ))
    return CapacityReport(
        eta=sol.eta,
        load=config.alpha * profile_moments(profile)[0],
        spectral_efficiency=spectral_efficiency(config.alpha, profile, sol.eta),
        per_class=tuple(per_class),
        sir=sol,
        alpha=config.alpha,
    )
