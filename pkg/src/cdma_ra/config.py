"""Run configuration files.

YAML (JSON is accepted too, being a YAML subset)::

    system:
      alpha: 0.95
      noise_variance: 1.0
      receiver: mmse            # mmse | decorrelator | mf
      chip_model: binary        # binary | gaussian
    classes:
      - {snr_db: 10, fraction: 10/11, tx_prob: 1.0}
      - {power: 1000, fraction: 1/11, tx_prob: 1.0, arrival_rate: 0.5}
    sim: {spreading_gain: 256, slots: 20, trials: 20, seed: 0, probe_class: 0}
    queue:
      - {arrival_rate: 0.3, service_prob: 0.5}
    output: out
    options: {tol: 1.0e-12, grid_step: 0.05}

Each class gives exactly one of ``power`` (linear) or ``snr_db``
(converted with p = noise_variance * 10^(dB/10)).  Fractions may be written
as ratios such as ``10/11``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import yaml

from .asymptotic import DEFAULT_TOL
from .errors import ConfigError
from .finite_sim import TrialConfig
from .model import ChipModel, PowerClass, PowerProfile, Receiver, SystemConfig, power_from_snr_db, validate_profile
from .queue import QueueParams

DEFAULT_GRID_STEP = 0.05
DEFAULT_OUTPUT = "out"


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    profile: PowerProfile
    sim: Optional[TrialConfig] = None
    probe_class: int = 0
    queue: Optional[tuple[QueueParams, ...]] = None
    output: str = DEFAULT_OUTPUT
    tol: float = DEFAULT_TOL
    grid_step: float = DEFAULT_GRID_STEP

    def with_receiver(self, receiver) -> "RunConfig":
        return replace(self, system=replace(self.system, receiver=Receiver(receiver)))


def _number(value: Any, path: str, allow_ratio: bool = False) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if allow_ratio and isinstance(value, str):
        try:
            return float(Fraction(value.replace(" ", "")))
        except (ValueError, ZeroDivisionError):
            pass
    raise ConfigError(f"{path}: expected a number, got {value!r}")


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _section(doc: dict, key: str, required: bool = True) -> Any:
    if key not in doc or doc[key] is None:
        if required:
            raise ConfigError(f"{key}: missing section")
        return None
    return doc[key]


def _require(d: dict, key: str, path: str) -> Any:
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping")
    if key not in d or d[key] is None:
        raise ConfigError(f"{path}.{key}: missing required field")
    return d[key]


def _enum(cls, value, path):
    try:
        return cls(str(value).lower())
    except ValueError:
        options = ", ".join(m.value for m in cls)
        raise ConfigError(f"{path}: {value!r} is not one of {options}") from None


def parse_config(doc: Any) -> RunConfig:
    """Build and validate a RunConfig from an already-parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a mapping")

    sys_doc = _section(doc, "system")
    system = SystemConfig(
        alpha=_number(_require(sys_doc, "alpha", "system"), "system.alpha"),
        noise_var=_number(sys_doc.get("noise_variance", 1.0), "system.noise_variance"),
        receiver=_enum(Receiver, sys_doc.get("receiver", "mmse"), "system.receiver"),
        chip_model=_enum(ChipModel, sys_doc.get("chip_model", "binary"), "system.chip_model"),
    )

    classes_doc = _section(doc, "classes")
    if not isinstance(classes_doc, list) or not classes_doc:
        raise ConfigError("classes: expected a non-empty list")
    classes = []
    for i, c in enumerate(classes_doc):
        path = f"classes[{i}]"
        if not isinstance(c, dict):
            raise ConfigError(f"{path}: expected a mapping")
        has_p, has_db = c.get("power") is not None, c.get("snr_db") is not None
        if has_p == has_db:
            raise ConfigError(f"{path}: give exactly one of power or snr_db")
        if has_p:
            power = _number(c["power"], f"{path}.power")
        else:
            power = power_from_snr_db(_number(c["snr_db"], f"{path}.snr_db"), system.noise_var)
        fraction = _number(_require(c, "fraction", path), f"{path}.fraction", allow_ratio=True)
        tx_prob = _number(c.get("tx_prob", 1.0), f"{path}.tx_prob", allow_ratio=True)
        lam = c.get("arrival_rate")
        lam = None if lam is None else _number(lam, f"{path}.arrival_rate", allow_ratio=True)
        classes.append(PowerClass(power, fraction, tx_prob, lam))
    profile = PowerProfile(tuple(classes))
    problems = validate_profile(profile)
    if problems:
        raise ConfigError("invalid classes: " + "; ".join(problems))

    sim = None
    probe_class = 0
    sim_doc = _section(doc, "sim", required=False)
    if sim_doc is not None:
        if not isinstance(sim_doc, dict):
            raise ConfigError("sim: expected a mapping")
        sim = TrialConfig(
            spreading_gain=_integer(_require(sim_doc, "spreading_gain", "sim"), "sim.spreading_gain"),
            alpha=system.alpha,
            slots=_integer(sim_doc.get("slots", 20), "sim.slots"),
            trials=_integer(sim_doc.get("trials", 20), "sim.trials"),
            seed=_integer(sim_doc.get("seed", 0), "sim.seed"),
            chip_model=system.chip_model,
        )
        probe_class = _integer(sim_doc.get("probe_class", 0), "sim.probe_class")
        if not 0 <= probe_class < len(profile):
            raise ConfigError(f"sim.probe_class: {probe_class} does not name a class")

    queue = None
    queue_doc = _section(doc, "queue", required=False)
    if queue_doc is not None:
        if not isinstance(queue_doc, list):
            raise ConfigError("queue: expected a list")
        queue = tuple(
            QueueParams(
                _number(_require(qd, "arrival_rate", f"queue[{i}]"), f"queue[{i}].arrival_rate", allow_ratio=True),
                _number(_require(qd, "service_prob", f"queue[{i}]"), f"queue[{i}].service_prob", allow_ratio=True),
            )
            for i, qd in enumerate(queue_doc)
        )

    opts = _section(doc, "options", required=False) or {}
    tol = _number(opts.get("tol", DEFAULT_TOL), "options.tol")
    grid_step = _number(opts.get("grid_step", DEFAULT_GRID_STEP), "options.grid_step")
    if not tol > 0:
        raise ConfigError("options.tol: must be positive")
    if not 0 < grid_step <= 1:
        raise ConfigError("options.grid_step: must lie in (0, 1]")

    output = doc.get("output") or DEFAULT_OUTPUT
    return RunConfig(system, profile, sim, probe_class, queue, str(output), tol, grid_step)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    return parse_config(doc)


def config_document(rc: RunConfig) -> dict:
    """Canonical document form: linear powers, every field explicit."""
    doc: dict[str, Any] = {
        "system": {
            "alpha": rc.system.alpha,
            "noise_variance": rc.system.noise_var,
            "receiver": rc.system.receiver.value,
            "chip_model": rc.system.chip_model.value,
        },
        "classes": [],
    }
    for c in rc.profile.classes:
        entry = {"power": c.power, "fraction": c.fraction, "tx_prob": c.tx_prob}
        if c.arrival_rate is not None:
            entry["arrival_rate"] = c.arrival_rate
        doc["classes"].append(entry)
    if rc.sim is not None:
        doc["sim"] = {
            "spreading_gain": rc.sim.spreading_gain,
            "slots": rc.sim.slots,
            "trials": rc.sim.trials,
            "seed": rc.sim.seed,
            "probe_class": rc.probe_class,
        }
    if rc.queue is not None:
        doc["queue"] = [{"arrival_rate": q.arrival_rate, "service_prob": q.service_prob} for q in rc.queue]
    doc["output"] = rc.output
    doc["options"] = {"tol": rc.tol, "grid_step": rc.grid_step}
    return doc


def dump_config(rc: RunConfig) -> str:
    return yaml.safe_dump(config_document(rc), sort_keys=False)
