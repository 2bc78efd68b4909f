"""Built-in scenario presets, one per worked example.

A preset is a base scenario plus an ordered list of variants.  Each variant
fixes some fields (``overrides``) and sweeps others (``axes``); the rows of
all variants share one CSV whose leading columns are the union of the
override and axis paths in first-seen order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

from .config import ConfigError, ScenarioConfig
from .engine import sweep, sweep_columns


@dataclass(frozen=True)
class Variant:
    overrides: dict[str, Any] = field(default_factory=dict)
    axes: dict[str, list] = field(default_factory=dict)


@dataclass(frozen=True)
class PresetEntry:
    name: str
    description: str
    base: dict[str, Any]
    variants: tuple[Variant, ...]
    seeds: int = 1

    def config(self, slots: int | None = None) -> ScenarioConfig:
        data = dict(self.base)
        if slots is not None:
            data["slots"] = slots
        return ScenarioConfig.from_dict(data)

    def leading_columns(self) -> list[str]:
        cols: list[str] = []
        for v in self.variants:
            for k in list(v.overrides) + list(v.axes):
                if k not in cols:
                    cols.append(k)
        return cols

    def run(self, seeds: int | None = None, slots: int | None = None,
            jobs: int = 1) -> tuple[list[str], list[dict]]:
        base = self.config(slots)
        seed_list = list(range(self.seeds if seeds is None else seeds))
        rows: list[dict] = []
        for v in self.variants:
            cfg = base
            for path, value in v.overrides.items():
                cfg = cfg.replace_path(path, value)
            for r in sweep(cfg, v.axes, seed_list, jobs=jobs):
                rows.append({**v.overrides, **r})
        return sweep_columns(rows, self.leading_columns()), rows


_ABSTRACT_TASKS = {
    "name": "task-deferring",
    "slots": 100_000,
    "storage": {"kind": "ideal-buffer", "capacity_units": 10},
    "energy": {"process": "poisson", "mean_units": 0.75},
    "workload": {"kind": "tasks", "task_process": "bernoulli", "task_p": 0.35,
                 "task_cost_units": 2, "buffer_size": 1},
    "policy": {"name": "periodic_measure", "period_slots": 1},
}

_AOI_MAC = {
    "name": "aoi-mac",
    "slots": 100_000,
    "n_devices": 64,
    "storage": {"kind": "ideal-buffer", "capacity_units": 10},
    "energy": {"process": "bernoulli", "p": 0.1, "units": 1},
    "workload": {"kind": "packets", "event_p": 1 / 64},
    "channel": {"erasure": "linear"},
    "policy": {"name": "aoi_fully_aware", "tx_prob": "linear"},
}

_TINYML = {
    "name": "tinyml-select",
    "regime": "physical",
    "slots": 300,
    "storage": {"kind": "capacitor", "capacitance_F": 0.5, "v_max_V": 3.6, "initial_V": 2.01},
    "source": {"kind": "CI", "current_A": 0.0},
    "workload": {"kind": "tinyml"},
    "policy": {"name": "tinyml_select", "v_min_V": 2.0},
    "tinyml": {"v_nominal_V": 3.0, "idle_current_A": 50e-6, "inference_period_s": 1.0},
    "models": [
        {"id": "LTML", "accuracy_rank": 0, "energy_J": 1.46e-3, "duration_s": 0.2},
        {"id": "STML", "accuracy_rank": 1, "energy_J": 0.12e-3, "duration_s": 0.02},
    ],
}

_RF = {
    "name": "rf-combining",
    "regime": "physical",
    "slots": 1000,
    "workload": {"kind": "rf-combining"},
    "policy": {"name": "rf_explore_exploit"},
    "rf": {"antennas": 4, "tx_power_W": 10.0, "disk_radius_m": 100.0,
           "path_loss_exponent": 2.7, "reference_loss_dB": 40.0, "eh_efficiency": 0.5,
           "spacing_wavelengths": 0.5},
}

_NBIOT = {
    "name": "nbiot-gate",
    "regime": "physical",
    "slots": 21_600,
    "storage": {"kind": "capacitor", "capacitance_F": 1.5, "v_max_V": 5.0},
    "source": {"kind": "CP", "power_W": 10e-3},
    "workload": {"kind": "nbiot"},
    "policy": {"name": "dual_threshold_gate", "v_on_V": 4.0, "v_off_V": 3.6},
    "comm": {"mode": "unidirectional", "interval_s": 60.0, "dt_s": 1.0},
}

_SOLAR = {
    "name": "solar-forecast",
    "regime": "physical",
    "slots": 2880,
    "storage": {"kind": "ideal-buffer", "capacity_J": 10.0, "initial_J": 0.0},
    "workload": {"kind": "solar-forecast"},
    "policy": {"name": "forecast_wait"},
    "forecast": {"p": 5, "d": 1, "slot_s": 30.0, "train_days": 3, "task_energy_J": 5.0,
                 "horizon_slots": 120, "fixed_interval_slots": 20},
}

_HARVEST_MW = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]

PRESETS: dict[str, PresetEntry] = {
    p.name: p for p in (
        PresetEntry(
            "task-deferring",
            "Deferred task execution: periodic measurement (Q, E_c) vs energy-blind (F), "
            "buffer sizes 1 and 5",
            _ABSTRACT_TASKS,
            (
                Variant({"policy.name": "periodic_measure"},
                        {"workload.buffer_size": [1, 5],
                         "policy.measure_cost_units": [0, 1, 2],
                         "policy.period_slots": list(range(1, 51))}),
                Variant({"policy.name": "energy_blind", "policy.measure_cost_units": 0},
                        {"workload.buffer_size": [1, 5],
                         "policy.period_slots": list(range(1, 51))}),
            ),
            seeds=20,
        ),
        PresetEntry(
            "aoi-mac",
            "Slotted random access for AoI: fully-aware, threshold delta and energy-blind "
            "E_t over N=64 devices",
            _AOI_MAC,
            tuple(
                v for p in (1 / 64, 5 / 64) for v in (
                    Variant({"workload.event_p": p, "policy.name": "aoi_fully_aware"}),
                    Variant({"workload.event_p": p, "policy.name": "aoi_threshold"},
                            {"policy.delta_units": list(range(1, 11))}),
                    Variant({"workload.event_p": p, "policy.name": "energy_blind"},
                            {"policy.spend_units": list(range(1, 11))}),
                )
            ),
            seeds=20,
        ),
        PresetEntry(
            "tinyml-select",
            "Model selection between a large and a small network on a 0.5 F capacitor "
            "under a swept harvesting current",
            _TINYML,
            (Variant({}, {"source.current_A": [round(i * 1e-4, 10) for i in range(13)]}),),
        ),
        PresetEntry(
            "rf-combining",
            "Dynamic DFT-codebook RF combining vs DC, static and genie benchmarks over "
            "1000 random source positions",
            _RF,
            (Variant({}, {"rf.antennas": [1, 2, 4, 8, 16]}),),
        ),
        PresetEntry(
            "nbiot-gate",
            "Batteryless NB-IoT behind a 4.0/3.6 V gate: throughput and restarts vs harvest "
            "power",
            _NBIOT,
            (Variant({}, {"storage.capacitance_F": [1.5, 2.5],
                          "comm.interval_s": [1.0, 60.0],
                          "comm.mode": ["unidirectional", "bidirectional"],
                          "source.power_W": [round(p * 1e-3, 10) for p in _HARVEST_MW]}),),
        ),
        PresetEntry(
            "solar-forecast",
            "ARIMA(5,1,0) irradiance forecasting to time transmissions vs a fixed interval",
            _SOLAR,
            (Variant({}, {"policy.name": ["forecast_wait", "fixed_interval"]}),),
            seeds=3,
        ),
    )
}


def get_preset(name: str) -> PresetEntry:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError([f"unknown preset {name!r}; available: {', '.join(PRESETS)}"]) from None


def preset_names() -> Sequence[str]:
    return list(PRESETS)
