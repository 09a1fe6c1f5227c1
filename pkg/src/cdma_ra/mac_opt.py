"""Search for the MAC vector maximizing spectral efficiency.

Spectral efficiency depends on the MAC vector both directly and through the
implicitly defined SIR, so the search is derivative free: a coarse grid picks
a starting point, then cyclic coordinate ascent refines it with a golden
section search on each coordinate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .asymptotic import DEFAULT_TOL, solve_sir, spectral_efficiency
from .errors import ConfigError, ModelDomainError, ResourceError
from .model import PowerProfile, Receiver, SystemConfig

MAX_GRID_POINTS = 10**7
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepRow:
    thetas: tuple[float, ...]
    eta: float
    load: float
    c: float

    @property
    def feasible(self) -> bool:
        return self.c > -math.inf


@dataclass
class OptResult:
    theta_star: tuple[float, ...]
    c_star: float
    eta_star: float
    evaluations: int
    rounds: int
    grid_argmax: tuple[float, ...]
    grid_c: float
    trace: list[tuple[tuple[float, ...], float]] = field(default_factory=list)


def evaluate_mac(config: SystemConfig, profile: PowerProfile, thetas: Sequence[float],
                 tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Spectral efficiency and unit-power SIR with the MAC vector ``thetas``.

    Raises ModelDomainError for an overloaded multi-class decorrelator.
    """
    if any(not (0.0 <= t <= 1.0) for t in thetas):
        raise ConfigError(f"MAC vector components must lie in [0, 1], got {tuple(thetas)}")
    candidate = profile.with_tx_probs(thetas)
    eta = solve_sir(config, candidate, tol).eta
    return spectral_efficiency(config.alpha, candidate, eta), eta


def _objective(config, profile, tol):
    """C as a search objective; infeasible points map to -inf."""
    def f(thetas):
        try:
            return evaluate_mac(config, profile, thetas, tol)
        except ModelDomainError:
            return -math.inf, math.nan
    return f


def grid_values(grid_step: float) -> list[float]:
    n = round(1.0 / grid_step)
    if n < 1 or abs(n * grid_step - 1.0) > 1e-9:
        raise ConfigError(f"grid_step must divide 1 evenly, got {grid_step}")
    return [i / n for i in range(n + 1)]


def sweep_grid(config: SystemConfig, profile: PowerProfile, grid_step: float = 0.05,
               tol: float = DEFAULT_TOL) -> list[SweepRow]:
    """Evaluate C over the full Cartesian grid on [0, 1]^M.

    Rows are in lexicographic MAC order; infeasible points carry
    ``eta = nan`` and ``c = -inf``.
    """
    values = grid_values(grid_step)
    m = len(profile)
    if len(values) ** m > MAX_GRID_POINTS:
        raise ResourceError(f"grid of {len(values)}^{m} points exceeds {MAX_GRID_POINTS}")
    f = _objective(config, profile, tol)
    q = profile.fractions
    rows = []
    for thetas in itertools.product(values, repeat=m):
        c, eta = f(thetas)
        load = config.alpha * math.fsum(q * thetas)
        rows.append(SweepRow(tuple(thetas), eta, load, c))
    return rows


def grid_argmax(rows: Sequence[SweepRow]) -> SweepRow:
    """Best feasible row; exact ties go to the lexicographically largest MAC."""
    best = None
    for row in rows:
        if not row.feasible:
            continue
        if best is None or row.c > best.c or (row.c == best.c and row.thetas > best.thetas):
            best = row
    if best is None:
        raise ModelDomainError("no feasible MAC vector on the grid")
    return best


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-6) -> tuple[float, float, int]:
    """Maximize a unimodal ``f`` on [a, b]; returns (x, f(x), evaluations)."""
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 1
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    n = 2
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        n += 1
    return (c, fc, n) if fc >= fd else (d, fd, n)


def _feasible_upper(config, profile, thetas, i):
    """Largest theta_i keeping a multi-class decorrelator underloaded."""
    if config.receiver is not Receiver.DECORRELATOR or len(profile) == 1:
        return 1.0
    q = profile.fractions
    rest = math.fsum(q[j] * thetas[j] for j in range(len(thetas)) if j != i)
    return min(1.0, max(0.0, (1.0 / config.alpha - rest) / q[i]))


def optimize_mac(config: SystemConfig, profile: PowerProfile, grid_step: float = 0.1,
                 refine_tol: float = 1e-6, max_rounds: int = 50, tol: float = DEFAULT_TOL,
                 keep_trace: bool = True) -> OptResult:
    """Grid seed followed by cyclic coordinate ascent with golden-section line searches.

    Returns a local maximum; the grid seed guards against poor basins but
    global optimality is not guaranteed.  The coordinate search always also
    tries both ends of the feasible interval, since optima frequently sit
    on the boundary of [0, 1].
    """
    f = _objective(config, profile, tol)
    rows = sweep_grid(config, profile, grid_step, tol)
    seed = grid_argmax(rows)
    evaluations = len(rows)

    thetas = list(seed.thetas)
    c_cur, eta_cur = seed.c, seed.eta
    trace = [(tuple(thetas), c_cur)] if keep_trace else []
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        c_start = c_cur
        for i in range(len(thetas)):
            hi = _feasible_upper(config, profile, thetas, i)

            def line(x, i=i):
                trial = list(thetas)
                trial[i] = x
                return f(trial)[0]

            x_best, c_best, n = golden_section_max(line, 0.0, hi, refine_tol)
            evaluations += n
            for x in (0.0, hi):
                cx = line(x)
                evaluations += 1
                if cx > c_best:
                    x_best, c_best = x, cx
            if c_best > c_cur:
                thetas[i] = x_best
                c_cur, eta_cur = f(thetas)
                evaluations += 1
                if keep_trace:
                    trace.append((tuple(thetas), c_cur))
        if c_cur - c_start < refine_tol:
            break

    return OptResult(
        theta_star=tuple(thetas),
        c_star=c_cur,
        eta_star=eta_cur,
        evaluations=evaluations,
        rounds=rounds,
        grid_argmax=seed.thetas,
        grid_c=seed.c,
        trace=trace,
    )
