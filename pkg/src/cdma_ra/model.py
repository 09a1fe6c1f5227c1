"""Power classes, MAC policy and system parameters.

The power distribution F is a finite mixture of atoms: class ``i`` holds a
share ``fraction`` of the demanding users, all received at ``power`` and
transmitting with probability ``tx_prob`` in each slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError

FRACTION_SUM_TOL = 1e-12


class Receiver(str, Enum):
    MMSE = "mmse"
    DECORRELATOR = "decorrelator"
    MF = "mf"


class ChipModel(str, Enum):
    BINARY = "binary"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PowerClass:
    power: float
    fraction: float
    tx_prob: float = 1.0
    arrival_rate: Optional[float] = None


@dataclass(frozen=True)
class PowerProfile:
    """Ordered collection of power classes.

    Construction never raises; call :func:`validate_profile` (or
    :func:`require_valid`) to check the invariants.
    """

    classes: tuple[PowerClass, ...]

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))

    @classmethod
    def from_arrays(cls, powers, fractions, tx_probs=None, arrival_rates=None) -> "PowerProfile":
        powers = [float(p) for p in powers]
        m = len(powers)
        tx_probs = [1.0] * m if tx_probs is None else [float(t) for t in tx_probs]
        arrival_rates = [None] * m if arrival_rates is None else list(arrival_rates)
        if not (len(fractions) == len(tx_probs) == len(arrival_rates) == m):
            raise ConfigError("powers, fractions, tx_probs and arrival_rates must have equal length")
        return cls(tuple(
            PowerClass(p, float(q), t, None if lam is None else float(lam))
            for p, q, t, lam in zip(powers, fractions, tx_probs, arrival_rates)
        ))

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def powers(self) -> np.ndarray:
        return np.array([c.power for c in self.classes], dtype=float)

    @property
    def fractions(self) -> np.ndarray:
        return np.array([c.fraction for c in self.classes], dtype=float)

    @property
    def tx_probs(self) -> np.ndarray:
        return np.array([c.tx_prob for c in self.classes], dtype=float)

    @property
    def arrival_rates(self) -> list[Optional[float]]:
        return [c.arrival_rate for c in self.classes]

    def with_tx_probs(self, thetas: Sequence[float]) -> "PowerProfile":
        """Copy of the profile with the MAC vector replaced."""
        if len(thetas) != len(self.classes):
            raise ConfigError(f"MAC vector has length {len(thetas)}, profile has {len(self.classes)} classes")
        return PowerProfile(tuple(replace(c, tx_prob=float(t)) for c, t in zip(self.classes, thetas)))


@dataclass(frozen=True)
class SystemConfig:
    alpha: float
    noise_var: float = 1.0
    receiver: Receiver = Receiver.MMSE
    chip_model: ChipModel = ChipModel.BINARY

    def __post_init__(self):
        object.__setattr__(self, "receiver", Receiver(self.receiver))
        object.__setattr__(self, "chip_model", ChipModel(self.chip_model))
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigError(f"alpha must be positive and finite, got {self.alpha}")
        if not (self.noise_var > 0 and math.isfinite(self.noise_var)):
            raise ConfigError(f"noise_var must be positive and finite, got {self.noise_var}")


def power_from_snr_db(snr_db: float, noise_var: float) -> float:
    """Linear received power for a given SNR in dB, p = sigma^2 * 10^(dB/10)."""
    return noise_var * 10.0 ** (snr_db / 10.0)


def validate_profile(profile: PowerProfile) -> list[str]:
    """Return the list of violated invariants; an empty list means valid."""
    problems = []
    if not profile.classes:
        return ["profile has no classes"]
    for i, c in enumerate(profile.classes):
        if not (c.power > 0 and math.isfinite(c.power)):
            problems.append(f"classes[{i}].power must be positive and finite, got {c.power}")
        if not (c.fraction > 0):
            problems.append(f"classes[{i}].fraction must be positive, got {c.fraction}")
        if not (0.0 <= c.tx_prob <= 1.0):
            problems.append(f"classes[{i}].tx_prob must lie in [0, 1], got {c.tx_prob}")
        if c.arrival_rate is not None and not (0.0 <= c.arrival_rate < 1.0):
            problems.append(f"classes[{i}].arrival_rate must lie in [0, 1), got {c.arrival_rate}")
    total = math.fsum(c.fraction for c in profile.classes)
    if abs(total - 1.0) > FRACTION_SUM_TOL:
        problems.append(f"fractions sum to {total:.12g}, expected 1")
    for i in range(1, len(profile.classes)):
        prev, cur = profile.classes[i - 1].power, profile.classes[i].power
        if cur == prev:
            problems.append(f"classes[{i}].power duplicates classes[{i - 1}].power ({cur})")
        elif cur < prev:
            problems.append(f"classes[{i}].power {cur} is not greater than classes[{i - 1}].power {prev}")
    return problems


def require_valid(profile: PowerProfile) -> PowerProfile:
    problems = validate_profile(profile)
    if problems:
        raise ConfigError("invalid power profile: " + "; ".join(problems))
    return profile


def profile_moments(profile: PowerProfile) -> tuple[float, float]:
    """(E[theta(p)], E[theta(p) p]) under the class mixture."""
    q, t, p = profile.fractions, profile.tx_probs, profile.powers
    return math.fsum(q * t), math.fsum(q * t * p)


def traffic_load(alpha: float, profile: PowerProfile) -> float:
    """Limit number of active users per chip, alpha * E[theta]."""
    return alpha * profile_moments(profile)[0]


def limit_loaded_power_cdf(profile: PowerProfile, x) -> float | np.ndarray:
    """Limit CDF of the loaded powers p_i u_i.

    An atom of mass 1 - E[theta] sits at zero (silent users); class ``i``
    contributes mass q_i theta_i at p_i. Vectorised over ``x``.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(np.isnan(xs)):
        raise ValueError("loaded power CDF is defined for x >= 0 only")
    q, t, p = profile.fractions, profile.tx_probs, profile.powers
    mass = q * t
    # complement form keeps H(max power) == 1 exactly
    h = 1.0 - (mass[None, :] * (p[None, :] > xs.reshape(-1, 1))).sum(axis=1)
    return float(h[0]) if xs.ndim == 0 else h.reshape(xs.shape)
