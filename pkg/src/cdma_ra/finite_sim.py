"""Finite (K, N) Monte Carlo of one random-access CDMA slot.

User 0 is the probe: it always transmits and its SIR is measured.  Users
1..K-1 interfere, each active with probability equal to its class's
transmission probability.  SIRs are computed analytically from the receiver
vector ``l`` as ``(l's_1)^2 p_1 / (sigma^2 |l|^2 + l' S P U S' l)``, so
neither symbols nor noise are sampled.

Random streams: trial ``t`` of a run with master seed ``s`` uses
``PCG64(SeedSequence(s, spawn_key=(t,)))``.  Within a trial every slot draws
a fresh spreading matrix, then the interferers' activity indicators, from
that stream.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .asymptotic import sir_decorrelator, sir_mf, solve_sir_mmse
from .errors import ConfigError, ModelDomainError
from .model import ChipModel, PowerProfile, Receiver, SystemConfig, limit_loaded_power_cdf, require_valid

log = logging.getLogger(__name__)

PINV_RCOND = 1e-10
RECEIVERS = (Receiver.MMSE, Receiver.DECORRELATOR, Receiver.MF)


@dataclass(frozen=True)
class TrialConfig:
    spreading_gain: int
    alpha: float
    slots: int = 20
    trials: int = 20
    seed: int = 0
    chip_model: ChipModel = ChipModel.BINARY

    def __post_init__(self):
        object.__setattr__(self, "chip_model", ChipModel(self.chip_model))
        if self.spreading_gain < 2:
            raise ConfigError("spreading_gain must be >= 2")
        if self.slots < 1 or self.trials < 1:
            raise ConfigError("slots and trials must be >= 1")
        if self.users < 2:
            raise ConfigError(f"K = round(alpha N) = {self.users} must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def users(self) -> int:
        return int(round(self.alpha * self.spreading_gain))


@dataclass(frozen=True)
class SlotSample:
    active_count: int
    load: float
    sir_mmse: float
    sir_dec: float
    sir_mf: float
    loaded_powers: np.ndarray = field(repr=False)
    trial: int = 0
    slot: int = 0
    warnings: tuple[str, ...] = ()

    def sir(self, receiver: Receiver) -> float:
        return {Receiver.MMSE: self.sir_mmse, Receiver.DECORRELATOR: self.sir_dec,
                Receiver.MF: self.sir_mf}[Receiver(receiver)]


@dataclass
class SimSummary:
    probe_power: float
    sir_mean: dict[Receiver, float]
    sir_std: dict[Receiver, float]
    load_mean: float
    load_std: float
    ks_distance: float
    eta: dict[Receiver, Optional[float]]
    samples: list[SlotSample] = field(repr=False, default_factory=list)
    warnings: int = 0

    @property
    def theoretical_sir(self) -> dict[Receiver, Optional[float]]:
        """Limit SIR of the probe, p_1 * eta."""
        return {r: None if e is None else self.probe_power * e for r, e in self.eta.items()}

    def relative_error(self, receiver: Receiver) -> float:
        target = self.theoretical_sir[receiver]
        return math.nan if target is None else self.sir_mean[receiver] / target - 1.0


def gen_spreading(n: int, k: int, chip_model: ChipModel, rng: np.random.Generator) -> np.ndarray:
    """N x K spreading matrix; columns are the users' signatures."""
    if ChipModel(chip_model) is ChipModel.BINARY:
        return (2.0 * rng.integers(0, 2, size=(n, k)) - 1.0) / math.sqrt(n)
    return rng.standard_normal((n, k)) / math.sqrt(n)


def class_counts(k: int, fractions: Sequence[float]) -> np.ndarray:
    """Largest-remainder apportionment of ``k`` users to classes."""
    q = np.asarray(fractions, dtype=float)
    quota = k * q
    counts = np.floor(quota).astype(int)
    short = k - counts.sum()
    # stable sort: equal remainders favour the lower class index
    order = np.argsort(-(quota - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def assign_classes(k: int, profile: PowerProfile, probe_class: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-user powers and class labels; user 0 is in ``probe_class``."""
    m = len(profile)
    if k < m:
        raise ConfigError(f"K = {k} users cannot populate {m} classes")
    if not 0 <= probe_class < m:
        raise ConfigError(f"probe_class {probe_class} out of range for {m} classes")
    counts = class_counts(k, profile.fractions)
    if counts[probe_class] == 0:
        raise ConfigError(f"class {probe_class} receives no users at K = {k}")
    counts = counts.copy()
    counts[probe_class] -= 1
    labels = np.concatenate([[probe_class], np.repeat(np.arange(m), counts)])
    return profile.powers[labels], labels


def _sir(l, s1, p1, sigma2, interf, powers):
    signal = (l @ s1) ** 2 * p1
    proj = interf.T @ l
    denom = sigma2 * (l @ l) + np.sum(powers * proj * proj)
    return float(signal / denom)


def decorrelator_pinv_sir(s1, p1, sigma2, interf, powers) -> float:
    """Decorrelator SIR from the first row of pinv([s1, S_active])."""
    a = np.column_stack([s1, interf])
    l = np.linalg.pinv(a, rcond=PINV_RCOND)[0]
    return _sir(l, s1, p1, sigma2, interf, powers)


def decorrelator_projector_sir(s1, p1, sigma2, interf) -> tuple[float, int]:
    """p1 s1'(I - Pi) s1 / sigma^2 with Pi the projector onto span(interf).

    Returns the SIR and the numerical rank of ``interf``.
    """
    if interf.shape[1] == 0:
        return float(p1 * (s1 @ s1) / sigma2), 0
    q, r, _ = scipy.linalg.qr(interf, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > PINV_RCOND * diag[0]))
    c = q[:, :rank].T @ s1
    return float(p1 * (s1 @ s1 - c @ c) / sigma2), rank


def run_slot(s: np.ndarray, powers: np.ndarray, thetas: np.ndarray, sigma2: float,
             rng: Optional[np.random.Generator] = None, active: Optional[np.ndarray] = None,
             cross_check: bool = False) -> SlotSample:
    """Empirical SIR of user 0 under the three linear receivers for one slot.

    ``active`` fixes the interferers' indicators u_2..u_K (length K-1);
    otherwise they are drawn from ``rng`` with probabilities ``thetas[1:]``.
    """
    n, k = s.shape
    powers = np.asarray(powers, dtype=float)
    if active is None:
        active = rng.random(k - 1) < np.asarray(thetas, dtype=float)[1:]
    active = np.asarray(active, dtype=bool)
    if active.shape != (k - 1,):
        raise ValueError(f"active must have length K-1 = {k - 1}")
    warnings = []

    s1, p1 = s[:, 0], powers[0]
    interf = s[:, 1:][:, active]
    p_int = powers[1:][active]
    ka = 1 + int(active.sum())

    m = sigma2 * np.eye(n) + (interf * p_int) @ interf.T
    sir_mmse = float(p1 * s1 @ scipy.linalg.solve(m, s1, assume_a="pos"))
    sir_mf = _sir(s1, s1, p1, sigma2, interf, p_int)

    if ka <= n:
        sir_dec, rank = decorrelator_projector_sir(s1, p1, sigma2, interf)
        # projector form needs [s1, interf] to have full column rank
        if rank < ka - 1 or sir_dec <= PINV_RCOND * p1 * (s1 @ s1) / sigma2:
            warnings.append(f"rank-deficient active signature matrix ({ka} active users, N = {n})")
            sir_dec = decorrelator_pinv_sir(s1, p1, sigma2, interf, p_int)
        elif cross_check:
            alt = decorrelator_pinv_sir(s1, p1, sigma2, interf, p_int)
            if not math.isclose(alt, sir_dec, rel_tol=1e-8, abs_tol=1e-12):
                warnings.append(f"decorrelator forms disagree: projector {sir_dec!r}, pinv {alt!r}")
    else:
        sir_dec = decorrelator_pinv_sir(s1, p1, sigma2, interf, p_int)

    loaded = np.where(active, powers[1:], 0.0)
    return SlotSample(ka, ka / n, sir_mmse, sir_dec, sir_mf, loaded, warnings=tuple(warnings))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _run_trial(t, tc, sigma2, powers, thetas, cross_check):
    rng = trial_rng(tc.seed, t)
    out = []
    for n_slot in range(tc.slots):
        s = gen_spreading(tc.spreading_gain, len(powers), tc.chip_model, rng)
        sample = run_slot(s, powers, thetas, sigma2, rng, cross_check=cross_check)
        out.append(SlotSample(sample.active_count, sample.load, sample.sir_mmse, sample.sir_dec,
                              sample.sir_mf, sample.loaded_powers, t, n_slot, sample.warnings))
    return out


def limit_etas(alpha: float, sigma2: float, profile: PowerProfile) -> dict[Receiver, Optional[float]]:
    etas: dict[Receiver, Optional[float]] = {Receiver.MMSE: solve_sir_mmse(alpha, sigma2, profile).eta}
    try:
        etas[Receiver.DECORRELATOR] = sir_decorrelator(alpha, sigma2, profile).eta
    except ModelDomainError:
        etas[Receiver.DECORRELATOR] = None
    etas[Receiver.MF] = sir_mf(alpha, sigma2, profile).eta
    return etas


def run_trials(trial_config: TrialConfig, system_config: SystemConfig, profile: PowerProfile,
               probe_class: int = 0, workers: int = 1, cross_check: bool = False) -> SimSummary:
    """Run ``trials x slots`` independent slots and summarise them.

    Results do not depend on ``workers``: each trial owns its random stream
    and samples are collected in trial order.
    """
    require_valid(profile)
    tc = trial_config
    powers, labels = assign_classes(tc.users, profile, probe_class)
    thetas = profile.tx_probs[labels]
    sigma2 = system_config.noise_var

    def one(t):
        return _run_trial(t, tc, sigma2, powers, thetas, cross_check)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_trial = list(pool.map(one, range(tc.trials)))
    else:
        per_trial = [one(t) for t in range(tc.trials)]
    samples = [x for trial in per_trial for x in trial]

    n_warn = sum(len(x.warnings) for x in samples)
    if n_warn:
        log.warning("%d numerical warnings across %d slots", n_warn, len(samples))

    sirs = {r: np.array([x.sir(r) for x in samples]) for r in RECEIVERS}
    loads = np.array([x.load for x in samples])
    pooled = np.concatenate([x.loaded_powers for x in samples])
    return SimSummary(
        probe_power=float(powers[0]),
        sir_mean={r: float(v.mean()) for r, v in sirs.items()},
        sir_std={r: float(v.std(ddof=1)) if len(v) > 1 else 0.0 for r, v in sirs.items()},
        load_mean=float(loads.mean()),
        load_std=float(loads.std(ddof=1)) if len(loads) > 1 else 0.0,
        ks_distance=ks_check(pooled, profile),
        eta=limit_etas(tc.alpha, sigma2, profile),
        samples=samples,
        warnings=n_warn,
    )


def ks_check(samples, profile: PowerProfile) -> float:
    """Sup-distance between the empirical CDF of loaded powers and its limit.

    Both are step functions jumping only at 0 and the class powers, so the
    supremum is attained on those atoms.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("ks_check needs at least one sample")
    atoms = np.concatenate([[0.0], profile.powers])
    empirical = np.searchsorted(x, atoms, side="right") / x.size
    return float(np.max(np.abs(empirical - limit_loaded_power_cdf(profile, atoms))))


def sample_rows(samples: Sequence[SlotSample]) -> list[tuple]:
    """Rows for the per-slot CSV export."""
    return [(x.trial, x.slot, x.active_count, x.load, x.sir_mmse, x.sir_dec, x.sir_mf) for x in samples]


SAMPLE_HEADER = ("trial", "slot", "K_a", "load", "sir_mmse", "sir_dec", "sir_mf")
