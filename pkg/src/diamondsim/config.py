"""JSON simulation config: parsing, validation and canonical serialization.

Unknown keys are rejected.  Every validation failure raises
:class:`~diamondsim.errors.ConfigError` naming the dotted key path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .dynamics import DissipationSpec, TimeGrid, basis_state, validate_density
from .errors import ConfigError, DiamondSimError
from .model import PULSE_NAMES, PulseEnvelope, PulseSchedule

POP_CONVENTIONS = ("second-into-first", "first-into-second")

_TOP_KEYS = {"schedule", "dissipation", "grid", "initial_state", "samples", "outputs"}
_PULSE_KEYS = {"shape", "amplitude", "center", "width", "table_times", "table_values"}
_DISS_KEYS = {"mode", "gamma_pop", "gamma_pop_convention", "gamma_deph", "gamma_diag"}
_GRID_KEYS = {"t_start", "t_end", "step", "sample_stride"}
_OUTPUT_KEYS = {"csv", "summary", "tree_json", "tree_dot"}


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(where or "<root>", "expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}" if where else extra[0], "unknown key")


def _num(obj, key, where, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}.{key}", "missing required value")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class Sample:
    name: str
    t: float


@dataclass(frozen=True)
class SimulationConfig:
    schedule: PulseSchedule
    grid: TimeGrid
    rho0: np.ndarray
    initial_state: dict
    dissipation: DissipationSpec | None = None
    pop_convention: str = "second-into-first"
    samples: tuple = ()
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d) -> SimulationConfig:
        _reject_unknown(d, _TOP_KEYS, "")
        schedule = _parse_schedule(d.get("schedule"))
        grid = _parse_grid(d.get("grid", {}))
        rho0, init = _parse_initial(d.get("initial_state", {"basis": 0}))
        diss, conv = _parse_dissipation(d.get("dissipation"))
        samples = _parse_samples(d.get("samples", []), grid)
        outputs = d.get("outputs", {})
        _reject_unknown(outputs, _OUTPUT_KEYS, "outputs")
        for k, v in outputs.items():
            if not isinstance(v, str) or not v:
                raise ConfigError(f"outputs.{k}", "expected a non-empty path string")
        return cls(schedule, grid, rho0, init, diss, conv, samples, dict(outputs))

    def to_dict(self) -> dict:
        out = {
            "schedule": {
                "delta": self.schedule.delta,
                "pulses": {name: _envelope_dict(env) for name, env in zip(PULSE_NAMES, self.schedule.envelopes)},
            },
            "grid": {
                "t_start": self.grid.t_start,
                "t_end": self.grid.t_end,
                "step": self.grid.step,
                "sample_stride": self.grid.sample_stride,
            },
            "initial_state": self.initial_state,
            "samples": [{"name": s.name, "t": s.t} for s in self.samples],
            "outputs": dict(self.outputs),
        }
        if self.dissipation is not None:
            pop = self.dissipation.gamma_pop
            if self.pop_convention == "first-into-second":
                pop = pop.T
            out["dissipation"] = {
                "mode": self.dissipation.mode,
                "gamma_pop": pop.tolist(),
                "gamma_pop_convention": self.pop_convention,
                "gamma_deph": self.dissipation.gamma_deph.tolist(),
                "gamma_diag": self.dissipation.gamma_diag.tolist(),
            }
        return out


def _envelope_dict(env: PulseEnvelope):
    d = {"shape": env.shape, "amplitude": env.amplitude, "center": env.center, "width": env.width}
    if env.shape == "custom-table":
        d["table_times"] = list(env.table_times)
        d["table_values"] = list(env.table_values)
    return d


def _parse_schedule(d):
    if d is None:
        raise ConfigError("schedule", "missing required section")
    _reject_unknown(d, {"delta", "pulses"}, "schedule")
    pulses = d.get("pulses")
    if pulses is None:
        raise ConfigError("schedule.pulses", "missing required section")
    _reject_unknown(pulses, set(PULSE_NAMES), "schedule.pulses")
    envs = []
    for name in PULSE_NAMES:
        where = f"schedule.pulses.{name}"
        p = pulses.get(name)
        if p is None:
            raise ConfigError(where, "missing pulse definition")
        _reject_unknown(p, _PULSE_KEYS, where)
        shape = p.get("shape", "gaussian")
        width = _num(p, "width", where)
        if width <= 0:
            raise ConfigError(f"{where}.width", f"pulse width must be > 0, got {width}")
        amplitude = _num(p, "amplitude", where)
        if amplitude < 0:
            raise ConfigError(f"{where}.amplitude", f"pulse amplitude must be >= 0, got {amplitude}")
        try:
            envs.append(PulseEnvelope(
                shape=shape,
                amplitude=amplitude,
                center=_num(p, "center", where),
                width=width,
                table_times=tuple(p.get("table_times", ())),
                table_values=tuple(p.get("table_values", ())),
            ))
        except (DiamondSimError, TypeError) as exc:
            raise ConfigError(where, str(exc)) from None
    try:
        return PulseSchedule(*envs, delta=_num(d, "delta", "schedule", default=0.0))
    except DiamondSimError as exc:
        raise ConfigError("schedule.pulses", str(exc)) from None


def _parse_grid(d):
    _reject_unknown(d, _GRID_KEYS, "grid")
    stride = d.get("sample_stride", 1)
    if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
        raise ConfigError("grid.sample_stride", "expected an integer >= 1")
    try:
        return TimeGrid(_num(d, "t_start", "grid", 0.0), _num(d, "t_end", "grid", 10.0),
                        _num(d, "step", "grid", 1e-3), stride)
    except DiamondSimError as exc:
        raise ConfigError("grid", str(exc)) from None


def _parse_initial(d):
    if not isinstance(d, dict) or len(d) != 1 or not set(d) <= {"basis", "rho"}:
        raise ConfigError("initial_state", 'expected {"basis": index} or {"rho": [[[re, im], ...], ...]}')
    if "basis" in d:
        b = d["basis"]
        if isinstance(b, bool) or b not in range(4):
            raise ConfigError("initial_state.basis", "basis index must be 0..3")
        return basis_state(b), {"basis": b}
    try:
        arr = np.array(d["rho"], dtype=float)
        if arr.shape != (4, 4, 2):
            raise ValueError(f"shape {arr.shape}")
        rho = validate_density(arr[..., 0] + 1j * arr[..., 1])
    except (ValueError, TypeError) as exc:
        raise ConfigError("initial_state.rho", f"invalid density matrix ({exc})") from None
    return rho, {"rho": arr.tolist()}


def _parse_dissipation(d):
    if d is None:
        return None, "second-into-first"
    _reject_unknown(d, _DISS_KEYS, "dissipation")
    conv = d.get("gamma_pop_convention", "second-into-first")
    if conv not in POP_CONVENTIONS:
        raise ConfigError("dissipation.gamma_pop_convention", f"expected one of {POP_CONVENTIONS}")
    try:
        pop = np.array(d.get("gamma_pop", np.zeros((4, 4))), dtype=float)
        if conv == "first-into-second":
            pop = pop.T
        spec = DissipationSpec(
            gamma_pop=pop,
            gamma_deph=np.array(d.get("gamma_deph", np.zeros((4, 4))), dtype=float),
            gamma_diag=np.array(d.get("gamma_diag", np.zeros(4)), dtype=float),
            mode=d.get("mode", "paper-literal"),
        )
    except (DiamondSimError, ValueError, TypeError) as exc:
        raise ConfigError("dissipation", str(exc)) from None
    return spec, conv


def _parse_samples(items, grid):
    if not isinstance(items, list):
        raise ConfigError("samples", "expected a list of {name, t}")
    out, seen = [], set()
    for i, s in enumerate(items):
        _reject_unknown(s, {"name", "t"}, f"samples[{i}]")
        name = s.get("name")
        if not isinstance(name, str) or not name or name in seen:
            raise ConfigError(f"samples[{i}].name", "expected a unique non-empty name")
        seen.add(name)
        t = _num(s, "t", f"samples[{i}]")
        if not grid.t_start <= t <= grid.t_end:
            raise ConfigError(f"samples[{i}].t", f"instant {t} outside the time grid")
        out.append(Sample(name, t))
    return tuple(out)


def load_config(path) -> SimulationConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("<file>", f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON ({exc})") from None
    return SimulationConfig.from_dict(data)


def default_config_path() -> Path:
    return Path(str(resources.files("diamondsim") / "data" / "default_config.json"))
