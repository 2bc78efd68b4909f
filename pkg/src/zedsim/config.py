"""Scenario configuration: typed dataclass tree, TOML I/O and validation.

Keys carry unit suffixes: ``_J``, ``_W``, ``_V``, ``_F``, ``_A``, ``_s``,
``_m`` and ``_ohm`` in the physical regime, ``_units`` and ``_slots`` in the
abstract one.
"""

from __future__ import annotations

import copy
import dataclasses
import os
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli
import tomli_w

SCHEMA_VERSION = 1

WORKLOADS = ("tasks", "packets", "nbiot", "tinyml", "rf-combining", "solar-forecast")
ABSTRACT_WORKLOADS = ("tasks", "packets")
POLICIES = {
    "tasks": ("energy_blind", "periodic_measure"),
    "packets": ("energy_blind", "aoi_fully_aware", "aoi_threshold"),
    "nbiot": ("dual_threshold_gate",),
    "tinyml": ("tinyml_select",),
    "rf-combining": ("rf_explore_exploit",),
    "solar-forecast": ("forecast_wait", "fixed_interval"),
}


class ConfigError(ValueError):
    """Configuration rejected; ``violations`` lists every problem with its path."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclass
class StorageConfig:
    kind: str = "ideal-buffer"  # ideal-buffer | capacitor | preset
    preset: str | None = None
    capacity_units: int | None = None
    capacity_J: float | None = None
    capacitance_F: float | None = None
    v_max_V: float | None = None
    v_cutoff_V: float = 0.0
    eta_in: float | None = None
    eta_out: float | None = None
    leak_fraction_per_hour: float | None = None
    leak_power_W: float = 0.0
    initial_units: int = 0
    initial_J: float | None = None
    initial_V: float | None = None


@dataclass
class EnergyConfig:
    process: str = "bernoulli"  # poisson | bernoulli | deterministic | trace
    mean_units: float = 0.0
    p: float = 0.0
    units: int = 1
    trace_units: list[int] = field(default_factory=list)


@dataclass
class WorkloadConfig:
    kind: str = "tasks"
    task_process: str = "bernoulli"  # bernoulli | trace
    task_p: float = 0.0
    task_trace: list[int] = field(default_factory=list)
    task_cost_units: int = 1
    buffer_size: int = 1
    on_fail: str = "retain"  # retain | discard
    event_p: float = 0.0


@dataclass
class PolicyConfig:
    name: str = "periodic_measure"
    period_slots: int = 1
    measure_cost_units: float = 0.0
    spend_units: int | None = None
    delta_units: int = 1
    comparator_cost_units: float = 0.0
    tx_prob: str = "linear"  # linear | always | never | table
    tx_prob_table: list[float] = field(default_factory=list)
    sample_on: str = "slot"  # slot | generation
    v_on_V: float = 4.0
    v_off_V: float = 3.6
    v_min_V: float = 2.0
    noise_std_W: float = 0.0


@dataclass
class ChannelConfig:
    erasure: str = "exp"  # exp | linear | none | table
    erasure_scale_units: float = 3.0
    erasure_table: list[float] = field(default_factory=list)


@dataclass
class SourceConfig:
    kind: str = "CP"  # CP | CI | CV
    power_W: float = 0.0
    current_A: float = 0.0
    voltage_V: float = 0.0
    r_src_ohm: float = 1.0
    i_max_A: float | None = None


@dataclass
class CommConfig:
    mode: str = "unidirectional"  # unidirectional | bidirectional
    uplink_energy_J: float = 0.035
    downlink_energy_J: float = 0.010
    interval_s: float = 60.0
    psm_power_W: float = 10e-6
    rejoin_energy_J: float = 3.3 * 13e-3 * 13.0
    pmu_efficiency: float = 1.0
    dt_s: float = 1.0


@dataclass
class TinyModelConfig:
    id: str = "model"
    accuracy_rank: int = 0
    energy_J: float = 1e-3
    duration_s: float = 0.1


@dataclass
class TinyMLConfig:
    v_nominal_V: float = 3.0
    idle_current_A: float = 0.0
    inference_period_s: float = 1.0


@dataclass
class RfConfig:
    antennas: int = 4
    tx_power_W: float = 10.0
    disk_radius_m: float = 100.0
    path_loss_exponent: float = 2.7
    reference_loss_dB: float = 40.0
    eh_efficiency: float = 0.5
    spacing_wavelengths: float = 0.5
    tune_power_W: float = 0.0
    measure_power_W: float = 0.0
    tune_time_s: float = 1e-3
    measure_time_s: float = 1e-3
    probe_duration_s: float = 0.0
    window_s: float = 1.0


@dataclass
class ForecastConfig:
    p: int = 5
    d: int = 1
    coefficients: list[float] = field(default_factory=list)
    slot_s: float = 30.0
    panel_area_m2: float = 0.081 * 0.137
    xi_pv: float = 0.17
    xi_pmu: float = 0.85
    peak_Wm2: float = 900.0
    cloud_ar: list[float] = field(default_factory=lambda: [0.6, 0.2])
    cloud_noise: float = 0.05
    train_days: int = 3
    task_energy_J: float = 5.0
    horizon_slots: int = 120
    fixed_interval_slots: int = 20
    sleep_power_W: float = 50e-6
    irradiance_csv: str | None = None


@dataclass
class ScenarioConfig:
    schema: int = SCHEMA_VERSION
    name: str = "scenario"
    seed: int = 0
    slots: int = 1000
    n_devices: int = 1
    regime: str = "abstract"
    storage: StorageConfig = field(default_factory=StorageConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    workload: WorkloadConfig = field(default_factory=WorkloadConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    comm: CommConfig = field(default_factory=CommConfig)
    models: list[TinyModelConfig] = field(default_factory=list)
    tinyml: TinyMLConfig = field(default_factory=TinyMLConfig)
    rf: RfConfig = field(default_factory=RfConfig)
    forecast: ForecastConfig = field(default_factory=ForecastConfig)
    sweep: dict[str, list] = field(default_factory=dict)

    # -- serialization -----------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        errors: list[str] = []
        cfg = _build(cls, data, "", errors)
        if errors:
            raise ConfigError(errors)
        errors = validate(cfg)
        if errors:
            raise ConfigError(errors)
        return cfg

    def to_dict(self) -> dict:
        return _dump(self)

    def replace_path(self, path: str, value: Any) -> "ScenarioConfig":
        """Copy with one dotted-path field set (validation not re-run)."""
        new = copy.deepcopy(self)
        obj = new
        parts = path.split(".")
        for p in parts[:-1]:
            obj = _child(obj, p, path)
        _set_leaf(obj, parts[-1], value, path)
        return new


def _child(obj, name: str, path: str):
    if isinstance(obj, list):
        try:
            return obj[int(name)]
        except (ValueError, IndexError):
            raise ConfigError([f"{path}: no element {name!r}"]) from None
    if not dataclasses.is_dataclass(obj) or name not in {f.name for f in dataclasses.fields(obj)}:
        raise ConfigError([f"{path}: unknown field {name!r}"])
    return getattr(obj, name)


def _set_leaf(obj, name: str, value: Any, path: str) -> None:
    if isinstance(obj, list):
        obj[int(name)] = value
        return
    if not dataclasses.is_dataclass(obj) or name not in {f.name for f in dataclasses.fields(obj)}:
        raise ConfigError([f"{path}: unknown field {name!r}"])
    hint = typing.get_type_hints(type(obj))[name]
    setattr(obj, name, _coerce(value, hint, path))


def check_path(cfg: ScenarioConfig, path: str) -> str | None:
    try:
        obj = cfg
        parts = path.split(".")
        for p in parts[:-1]:
            obj = _child(obj, p, path)
        leaf = parts[-1]
        if isinstance(obj, list):
            obj[int(leaf)]
        elif not dataclasses.is_dataclass(obj) or leaf not in {f.name for f in dataclasses.fields(obj)}:
            return f"{path}: unknown field {leaf!r}"
        elif dataclasses.is_dataclass(getattr(obj, leaf)):
            return f"{path}: not a scalar field"
    except ConfigError as exc:
        return exc.violations[0]
    except (ValueError, IndexError):
        return f"{path}: bad list index"
    return None


def _is_optional(hint) -> tuple[bool, Any]:
    args = typing.get_args(hint)
    if type(None) in args:
        rest = [a for a in args if a is not type(None)]
        return True, rest[0]
    return False, hint


def _coerce(value, hint, path: str):
    optional, base = _is_optional(hint)
    if value is None:
        if optional:
            return None
        raise ConfigError([f"{path}: value required"])
    origin = typing.get_origin(base)
    if base is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError([f"{path}: expected a number, got {value!r}"])
        return float(value)
    if base is int:
        if isinstance(value, bool) or not (isinstance(value, int) or
                                           (isinstance(value, float) and value.is_integer())):
            raise ConfigError([f"{path}: expected an integer, got {value!r}"])
        return int(value)
    if base is str:
        if not isinstance(value, str):
            raise ConfigError([f"{path}: expected a string, got {value!r}"])
        return value
    if base is bool:
        if not isinstance(value, bool):
            raise ConfigError([f"{path}: expected true/false, got {value!r}"])
        return value
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError([f"{path}: expected a list"])
        (item,) = typing.get_args(base)
        return [_coerce(v, item, f"{path}.{i}") for i, v in enumerate(value)]
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError([f"{path}: expected a table"])
        return {str(k): list(v) if isinstance(v, list) else v for k, v in value.items()}
    return value


def _build(cls, data, path: str, errors: list[str]):
    if not isinstance(data, dict):
        errors.append(f"{path or '<root>'}: expected a table")
        return cls()
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            errors.append(f"{path}{key}: unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        hint = hints[f.name]
        value = data[f.name]
        p = f"{path}{f.name}"
        if dataclasses.is_dataclass(hint):
            kwargs[f.name] = _build(hint, value, p + ".", errors)
            continue
        args = typing.get_args(hint)
        if typing.get_origin(hint) is list and args and dataclasses.is_dataclass(args[0]):
            if not isinstance(value, list):
                errors.append(f"{p}: expected an array of tables")
                continue
            kwargs[f.name] = [_build(args[0], v, f"{p}.{i}.", errors) for i, v in enumerate(value)]
            continue
        try:
            kwargs[f.name] = _coerce(value, hint, p)
        except ConfigError as exc:
            errors.extend(exc.violations)
    return cls(**kwargs)


def _dump(obj) -> dict:
    out = {}
    for f in dataclasses.fields(obj):
        v = getattr(obj, f.name)
        if v is None:
            continue
        if dataclasses.is_dataclass(v):
            out[f.name] = _dump(v)
        elif isinstance(v, list) and v and dataclasses.is_dataclass(v[0]):
            out[f.name] = [_dump(x) for x in v]
        elif isinstance(v, list):
            out[f.name] = list(v)
        elif isinstance(v, dict):
            out[f.name] = {k: list(x) if isinstance(x, list) else x for k, x in v.items()}
        else:
            out[f.name] = v
    return out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _prob(errors, path, v):
    if not 0.0 <= v <= 1.0:
        errors.append(f"{path}: probability {v!r} outside [0, 1]")


def _pos(errors, path, v, strict=True):
    if v is None or (v <= 0 if strict else v < 0):
        errors.append(f"{path}: must be {'> 0' if strict else '>= 0'}, got {v!r}")


def validate(cfg: ScenarioConfig) -> list[str]:
    from .energy import STORAGE_PRESETS

    e: list[str] = []
    if cfg.schema != SCHEMA_VERSION:
        e.append(f"schema: unsupported version {cfg.schema}")
    if not 1 <= cfg.slots < 1 << 40:
        e.append(f"slots: must lie in [1, 2^40), got {cfg.slots}")
    if cfg.n_devices < 1:
        e.append(f"n_devices: must be >= 1, got {cfg.n_devices}")
    if cfg.regime not in ("abstract", "physical"):
        e.append(f"regime: unknown regime {cfg.regime!r}")
    w = cfg.workload
    if w.kind not in WORKLOADS:
        e.append(f"workload.kind: unknown workload {w.kind!r}; one of {list(WORKLOADS)}")
        return e
    expected_regime = "abstract" if w.kind in ABSTRACT_WORKLOADS else "physical"
    if cfg.regime != expected_regime:
        e.append(f"regime: workload {w.kind!r} runs in the {expected_regime} regime")
    if cfg.policy.name not in POLICIES[w.kind]:
        e.append(f"policy.name: {cfg.policy.name!r} not available for workload "
                 f"{w.kind!r}; one of {list(POLICIES[w.kind])}")

    s = cfg.storage
    if s.kind not in ("ideal-buffer", "capacitor", "preset"):
        e.append(f"storage.kind: unknown storage kind {s.kind!r}")
    if s.kind == "preset" and s.preset not in STORAGE_PRESETS:
        e.append(f"storage.preset: unknown preset {s.preset!r}; one of {sorted(STORAGE_PRESETS)}")
    for name in ("eta_in", "eta_out"):
        v = getattr(s, name)
        if v is not None and not 0 < v <= 1:
            e.append(f"storage.{name}: must lie in (0, 1], got {v!r}")
    if s.leak_fraction_per_hour is not None and not 0 <= s.leak_fraction_per_hour < 1:
        e.append(f"storage.leak_fraction_per_hour: must lie in [0, 1), got {s.leak_fraction_per_hour!r}")
    _pos(e, "storage.leak_power_W", s.leak_power_W, strict=False)

    if w.kind in ABSTRACT_WORKLOADS:
        _validate_abstract(cfg, e)
    else:
        _validate_physical(cfg, e)
    for path, values in cfg.sweep.items():
        msg = check_path(cfg, path)
        if msg:
            e.append(f"sweep.{msg}")
        if not isinstance(values, list) or not values:
            e.append(f"sweep.{path}: needs a non-empty list of values")
    return e


def _validate_abstract(cfg: ScenarioConfig, e: list[str]) -> None:
    s, en, w, p, ch = cfg.storage, cfg.energy, cfg.workload, cfg.policy, cfg.channel
    if s.kind != "ideal-buffer":
        e.append("storage.kind: abstract workloads use an ideal-buffer")
    if s.capacity_units is None or s.capacity_units < 1:
        e.append(f"storage.capacity_units: must be an integer >= 1, got {s.capacity_units!r}")
        cap = None
    else:
        cap = s.capacity_units
    if s.eta_in not in (None, 1.0) or s.eta_out not in (None, 1.0):
        e.append("storage.eta_in/eta_out: abstract units need unit efficiencies")
    if s.leak_fraction_per_hour not in (None, 0.0) or s.leak_power_W:
        e.append("storage.leak_fraction_per_hour: abstract units do not leak")
    if cap is not None and not 0 <= s.initial_units <= cap:
        e.append(f"storage.initial_units: must lie in [0, {cap}], got {s.initial_units}")

    if en.process not in ("poisson", "bernoulli", "deterministic", "trace"):
        e.append(f"energy.process: unknown process {en.process!r}")
    if en.process == "poisson":
        _pos(e, "energy.mean_units", en.mean_units, strict=False)
    if en.process == "bernoulli":
        _prob(e, "energy.p", en.p)
    if en.process in ("bernoulli", "deterministic") and en.units < 0:
        e.append(f"energy.units: must be >= 0, got {en.units}")
    if en.process == "trace":
        if not en.trace_units:
            e.append("energy.trace_units: empty trace")
        if any(u < 0 for u in en.trace_units):
            e.append("energy.trace_units: values must be >= 0")

    if w.kind == "tasks":
        if w.task_process not in ("bernoulli", "trace"):
            e.append(f"workload.task_process: unknown process {w.task_process!r}")
        _prob(e, "workload.task_p", w.task_p)
        if w.task_process == "trace" and not w.task_trace:
            e.append("workload.task_trace: empty trace")
        if w.task_cost_units < 1:
            e.append(f"workload.task_cost_units: must be >= 1, got {w.task_cost_units}")
        if w.buffer_size < 1:
            e.append(f"workload.buffer_size: must be >= 1, got {w.buffer_size}")
        if w.on_fail not in ("retain", "discard"):
            e.append(f"workload.on_fail: must be retain or discard, got {w.on_fail!r}")
    else:
        _prob(e, "workload.event_p", w.event_p)

    if p.period_slots < 1:
        e.append(f"policy.period_slots: must be >= 1, got {p.period_slots}")
    if p.measure_cost_units < 0:
        e.append(f"policy.measure_cost_units: must be >= 0, got {p.measure_cost_units}")
    if p.measure_cost_units != int(p.measure_cost_units):
        e.append("policy.measure_cost_units: abstract costs are whole units")
    if p.comparator_cost_units != 0:
        e.append("policy.comparator_cost_units: only 0 is supported in whole-unit accounting")
    if w.kind == "tasks" and p.spend_units is not None:
        e.append("policy.spend_units: tasks always spend workload.task_cost_units")
    if w.kind == "packets" and p.name == "energy_blind":
        if p.spend_units is None:
            e.append("policy.spend_units: required for energy_blind transmissions")
        elif p.spend_units < 1 or (cap is not None and p.spend_units > cap):
            e.append(f"policy.spend_units: must lie in [1, {cap}], got {p.spend_units}")
    if w.kind == "tasks" and cap is not None and w.task_cost_units > cap:
        e.append(f"workload.task_cost_units: exceeds storage capacity {cap}")
    if p.name == "aoi_threshold" and cap is not None and not 1 <= p.delta_units <= cap:
        e.append(f"policy.delta_units: must lie in [1, {cap}], got {p.delta_units}")
    if p.sample_on not in ("generation", "slot"):
        e.append(f"policy.sample_on: must be generation or slot, got {p.sample_on!r}")
    if p.tx_prob not in ("linear", "always", "never", "table"):
        e.append(f"policy.tx_prob: unknown map {p.tx_prob!r}")
    if cap is not None and p.tx_prob == "table":
        t = p.tx_prob_table
        if len(t) != cap + 1 or any(not 0 <= x <= 1 for x in t) or any(
                b < a for a, b in zip(t, t[1:])):
            e.append("policy.tx_prob_table: needs E_M + 1 non-decreasing probabilities")
    if ch.erasure not in ("exp", "linear", "none", "table"):
        e.append(f"channel.erasure: unknown map {ch.erasure!r}")
    if ch.erasure == "exp":
        _pos(e, "channel.erasure_scale_units", ch.erasure_scale_units)
    if cap is not None and ch.erasure == "table":
        t = ch.erasure_table
        if len(t) != cap + 1 or any(not 0 <= x <= 1 for x in t) or any(
                b > a for a, b in zip(t, t[1:])):
            e.append("channel.erasure_table: needs E_M + 1 non-increasing probabilities")


def _validate_physical(cfg: ScenarioConfig, e: list[str]) -> None:
    w, s, src = cfg.workload, cfg.storage, cfg.source
    if w.kind in ("nbiot", "tinyml"):
        if s.kind != "capacitor":
            e.append(f"storage.kind: workload {w.kind!r} needs capacitor storage")
        _pos(e, "storage.capacitance_F", s.capacitance_F)
        _pos(e, "storage.v_max_V", s.v_max_V)
        if s.v_max_V is not None and s.v_cutoff_V >= s.v_max_V:
            e.append("storage.v_cutoff_V: must be below v_max_V")
    if w.kind == "nbiot":
        c, p = cfg.comm, cfg.policy
        if src.kind != "CP":
            e.append("source.kind: nbiot runs from a constant-power source")
        _pos(e, "source.power_W", src.power_W, strict=False)
        if not p.v_off_V < p.v_on_V:
            e.append("policy.v_off_V: must be below v_on_V")
        if s.v_max_V is not None and p.v_on_V > s.v_max_V:
            e.append("policy.v_on_V: must not exceed storage.v_max_V")
        if c.mode not in ("unidirectional", "bidirectional"):
            e.append(f"comm.mode: unknown mode {c.mode!r}")
        for name in ("interval_s", "dt_s"):
            _pos(e, f"comm.{name}", getattr(c, name))
        for name in ("uplink_energy_J", "downlink_energy_J", "psm_power_W", "rejoin_energy_J"):
            _pos(e, f"comm.{name}", getattr(c, name), strict=False)
        if not 0 < c.pmu_efficiency <= 1:
            e.append("comm.pmu_efficiency: must lie in (0, 1]")
    if w.kind == "tinyml":
        t = cfg.tinyml
        if src.kind != "CI":
            e.append("source.kind: tinyml runs from a constant-current source")
        if not cfg.models:
            e.append("models: at least one model required")
        for i, m in enumerate(cfg.models):
            _pos(e, f"models.{i}.energy_J", m.energy_J)
            _pos(e, f"models.{i}.duration_s", m.duration_s)
        ranks = [m.accuracy_rank for m in cfg.models]
        if len(set(ranks)) != len(ranks):
            e.append("models: accuracy ranks must be distinct")
        _pos(e, "tinyml.v_nominal_V", t.v_nominal_V)
        _pos(e, "tinyml.inference_period_s", t.inference_period_s)
        _pos(e, "tinyml.idle_current_A", t.idle_current_A, strict=False)
        _pos(e, "policy.v_min_V", cfg.policy.v_min_V)
        _pos(e, "source.current_A", src.current_A, strict=False)
    if w.kind == "rf-combining":
        r = cfg.rf
        if r.antennas < 1:
            e.append(f"rf.antennas: must be >= 1, got {r.antennas}")
        for name in ("tx_power_W", "disk_radius_m", "window_s", "tune_time_s", "measure_time_s"):
            _pos(e, f"rf.{name}", getattr(r, name))
        for name in ("tune_power_W", "measure_power_W", "probe_duration_s"):
            _pos(e, f"rf.{name}", getattr(r, name), strict=False)
        if not 0 < r.eh_efficiency <= 1:
            e.append("rf.eh_efficiency: must lie in (0, 1]")
        if r.antennas * r.probe_duration_s > r.window_s:
            e.append("rf.probe_duration_s: exploration longer than window_s")
    if w.kind == "solar-forecast":
        f = cfg.forecast
        if f.d not in (0, 1):
            e.append("forecast.d: must be 0 or 1")
        if f.p < 0:
            e.append("forecast.p: must be >= 0")
        if f.coefficients and len(f.coefficients) != f.p:
            e.append("forecast.coefficients: needs exactly p values")
        for name in ("slot_s", "panel_area_m2", "task_energy_J"):
            _pos(e, f"forecast.{name}", getattr(f, name))
        for name in ("xi_pv", "xi_pmu"):
            v = getattr(f, name)
            if not 0 < v <= 1:
                e.append(f"forecast.{name}: must lie in (0, 1]")
        if f.train_days < 1:
            e.append("forecast.train_days: must be >= 1")
        if f.horizon_slots < 1 or f.fixed_interval_slots < 1:
            e.append("forecast.horizon_slots/fixed_interval_slots: must be >= 1")
        _pos(e, "storage.capacity_J", s.capacity_J)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------


def loads(text: str) -> ScenarioConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"<file>: TOML syntax error: {exc}"]) from None
    return ScenarioConfig.from_dict(data)


def load(path: str | Path, *, env: dict | None = None) -> ScenarioConfig:
    """Read a TOML scenario.  ``SEED`` in the environment overrides ``seed``."""
    text = Path(path).read_text()
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"{path}: TOML syntax error: {exc}"]) from None
    env = os.environ if env is None else env
    if "SEED" in env:
        try:
            data["seed"] = int(env["SEED"])
        except ValueError:
            raise ConfigError([f"SEED: expected an integer, got {env['SEED']!r}"]) from None
    return ScenarioConfig.from_dict(data)


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def dump(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(dumps(cfg))
