"""Energy-aware decision strategies behind one observe/decide interface.

Abstract-regime policies (task deferring, AoI MAC) are small state machines.
The engine asks ``wants_measure`` before each decision so the sampling cost is
paid before the reading is used, then calls ``decide`` with an
:class:`Observation` and a ``uniform`` callable for any random draw, then
reports the energy actually spent through ``feedback``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .energy import ContractError, rc_transition

# integer codes shared with the compiled kernels
BLIND, PERIODIC, FULLY_AWARE, THRESHOLD = 0, 1, 2, 3


@dataclass(frozen=True)
class Observation:
    slot: int
    buffer_occupancy: int = 0
    exact_energy: float | None = None
    measure_failed: bool = False
    flags: tuple[bool, ...] | None = None
    forecast: tuple[float, ...] | None = None
    device_on: bool = True


class Decision(NamedTuple):
    action: str  # sleep | execute | transmit | defer | select_model | power_gate
    amount: float = 0.0
    arg: object = None


SLEEP = Decision("sleep")


# ---------------------------------------------------------------------------
# Energy maps
# ---------------------------------------------------------------------------


def erasure_table(capacity: int, kind: str = "exp", scale: float = 3.0,
                  table: Sequence[float] | None = None) -> np.ndarray:
    """f(E) for E = 0..E_M: probability a transmission using E units is erased."""
    if kind == "table":
        f = np.asarray(table, dtype=float)
    elif kind == "exp":
        f = np.exp(-np.arange(capacity + 1) / scale)
    elif kind == "linear":
        f = 1.0 - np.arange(capacity + 1) / capacity
    elif kind == "none":
        f = np.zeros(capacity + 1)
    else:
        raise ContractError(f"unknown erasure map {kind!r}")
    if f.shape != (capacity + 1,):
        raise ContractError("erasure table needs E_M + 1 entries")
    if np.any((f < 0) | (f > 1)) or np.any(np.diff(f) > 0):
        raise ContractError("erasure map must be non-increasing in [0, 1]")
    return f


def tx_prob_table(capacity: int, kind: str = "linear",
                  table: Sequence[float] | None = None) -> np.ndarray:
    """f'(E) for E = 0..E_M: transmit probability of a fully-aware device."""
    if kind == "table":
        f = np.asarray(table, dtype=float)
    elif kind == "linear":
        f = np.minimum(1.0, np.arange(capacity + 1) / capacity)
    elif kind == "always":
        f = np.ones(capacity + 1)
    elif kind == "never":
        f = np.zeros(capacity + 1)
    else:
        raise ContractError(f"unknown transmit-probability map {kind!r}")
    if f.shape != (capacity + 1,):
        raise ContractError("transmit-probability table needs E_M + 1 entries")
    if np.any((f < 0) | (f > 1)) or np.any(np.diff(f) < 0):
        raise ContractError("transmit probability must be non-decreasing in [0, 1]")
    return f


# ---------------------------------------------------------------------------
# Abstract-regime policies
# ---------------------------------------------------------------------------


class SlotPolicy:
    code: int = -1

    def reset(self) -> None:
        pass

    def wants_measure(self, slot: int, buffered: int, fresh: bool = False) -> bool:
        """``fresh`` flags a packet or task generated in this slot."""
        return False

    def decide(self, obs: Observation, uniform: Callable[[], float]) -> Decision:
        raise NotImplementedError

    def feedback(self, spent: float) -> None:
        pass

    def params(self) -> tuple[float, float, float]:
        """(a, b, c) parameter triple passed to the compiled kernels."""
        raise NotImplementedError


@dataclass
class EnergyBlind(SlotPolicy):
    """Fire every ``period`` slots when work is buffered, spending ``spend``.

    An attempt that finds less than ``spend`` stored fails and drains what
    is there.
    """

    period: int
    spend: float
    code: int = field(default=BLIND, init=False)

    def __post_init__(self) -> None:
        if self.period < 1 or not self.spend > 0:
            raise ContractError("energy-blind needs F >= 1 and E_t > 0")

    def decide(self, obs, uniform):
        if obs.buffer_occupancy > 0 and (obs.slot + 1) % self.period == 0:
            return Decision("execute", self.spend)
        return SLEEP

    def params(self):
        return float(self.period), float(self.spend), 0.0


@dataclass
class PeriodicMeasure(SlotPolicy):
    """Measure every ``period`` slots at ``measure_cost``; act on a
    conservative estimate that only decreases between measurements."""

    period: int
    measure_cost: float
    task_cost: float
    estimate: float = 0.0
    code: int = field(default=PERIODIC, init=False)

    def __post_init__(self) -> None:
        if self.period < 1 or self.measure_cost < 0 or not self.task_cost > 0:
            raise ContractError("periodic-measure needs Q >= 1, E_c >= 0, cost > 0")

    def reset(self):
        self.estimate = 0.0

    def wants_measure(self, slot, buffered, fresh=False):
        return (slot + 1) % self.period == 0

    def decide(self, obs, uniform):
        if obs.exact_energy is not None:
            self.estimate = obs.exact_energy
        elif obs.measure_failed:
            self.estimate = 0.0
        if obs.buffer_occupancy > 0 and self.estimate >= self.task_cost:
            return Decision("execute", self.task_cost)
        return SLEEP

    def feedback(self, spent):
        self.estimate = max(self.estimate - spent, 0.0)

    def params(self):
        return float(self.period), float(self.measure_cost), float(self.task_cost)


@dataclass
class FullyAware(SlotPolicy):
    """Sample the store and transmit with probability f'(E) using everything
    stored.  ``sample_on`` is "generation" (only in the slot a packet is
    generated) or "slot" (every slot a packet waits)."""

    tx_prob: np.ndarray
    measure_cost: float = 0.0
    sample_on: str = "slot"
    code: int = field(default=FULLY_AWARE, init=False)

    def __post_init__(self) -> None:
        if self.sample_on not in ("generation", "slot"):
            raise ContractError("sample_on must be 'generation' or 'slot'")

    def wants_measure(self, slot, buffered, fresh=False):
        if self.sample_on == "generation":
            return buffered > 0 and fresh
        return buffered > 0

    def decide(self, obs, uniform):
        e = obs.exact_energy
        if obs.buffer_occupancy == 0 or e is None or e <= 0:
            return SLEEP
        if uniform() < self.tx_prob[int(e)]:
            return Decision("transmit", e)
        return SLEEP

    def params(self):
        return 0.0, float(self.measure_cost), float(self.sample_on == "generation")


@dataclass
class AoiThreshold(SlotPolicy):
    """Single-comparator policy: transmit exactly ``delta`` once E >= delta."""

    delta: float
    comparator_cost: float = 0.0
    code: int = field(default=THRESHOLD, init=False)

    def __post_init__(self) -> None:
        if not self.delta >= 1:
            raise ContractError("threshold delta must be >= 1")

    def decide(self, obs, uniform):
        if obs.buffer_occupancy > 0 and obs.flags and obs.flags[0]:
            return Decision("transmit", self.delta)
        return SLEEP

    def params(self):
        return float(self.delta), float(self.comparator_cost), 0.0


def energy_blind(period: int, spend: float) -> EnergyBlind:
    return EnergyBlind(period, spend)


def periodic_measure(period: int, measure_cost: float, task_cost: float) -> PeriodicMeasure:
    return PeriodicMeasure(period, measure_cost, task_cost)


def aoi_fully_aware(tx_prob: np.ndarray, measure_cost: float = 0.0,
                    sample_on: str = "slot") -> FullyAware:
    return FullyAware(np.asarray(tx_prob, dtype=float), measure_cost, sample_on)


def aoi_threshold(delta: float, comparator_cost: float = 0.0) -> AoiThreshold:
    return AoiThreshold(delta, comparator_cost)


# ---------------------------------------------------------------------------
# TinyML model selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TinyModel:
    id: str
    accuracy_rank: int  # lower is more accurate
    duration: float  # T_L, s
    r_load: float  # R_L, ohm

    @classmethod
    def from_energy(cls, id: str, accuracy_rank: int, energy: float, duration: float,
                    v_nominal: float) -> "TinyModel":
        """Equivalent resistance of a task drawing ``energy`` over
        ``duration`` at ``v_nominal``: R_L = V^2 T_L / E."""
        if not energy > 0 or not duration > 0:
            raise ContractError("model energy and duration must be > 0")
        return cls(id, accuracy_rank, duration, v_nominal**2 * duration / energy)


@dataclass(frozen=True)
class TinyMLSelect:
    models: tuple[TinyModel, ...]
    v_min: float
    capacitance: float

    def __post_init__(self) -> None:
        ranks = [m.accuracy_rank for m in self.models]
        if ranks != sorted(ranks):
            raise ContractError("models must be sorted by accuracy (most accurate first)")

    def post_voltage(self, model: TinyModel, voltage: float, current: float) -> float:
        return rc_transition(voltage, current, model.r_load, self.capacitance, model.duration)

    def decide(self, voltage: float, current: float) -> Decision:
        for m in self.models:
            if self.post_voltage(m, voltage, current) >= self.v_min:
                return Decision("select_model", 0.0, m.id)
        return Decision("defer")


def tinyml_select(models: Sequence[TinyModel], v_min: float, capacitance: float) -> TinyMLSelect:
    return TinyMLSelect(tuple(sorted(models, key=lambda m: m.accuracy_rank)), v_min, capacitance)


# ---------------------------------------------------------------------------
# Dual-threshold power gate
# ---------------------------------------------------------------------------


@dataclass
class DualThresholdGate:
    """Hysteresis switch: ON once V >= v_on, OFF once V < v_off."""

    v_on: float
    v_off: float
    on: bool = False
    restarts: int = 0
    transitions: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.v_off < self.v_on:
            raise ContractError("gate needs V_off < V_on")

    def update(self, voltage: float, step: int = 0) -> str | None:
        """Feed a voltage sample; return "on"/"off" on a transition."""
        if not self.on and voltage >= self.v_on:
            self.on = True
            self.restarts += 1
            self.transitions.append((step, "on"))
            return "on"
        if self.on and voltage < self.v_off:
            self.on = False
            self.transitions.append((step, "off"))
            return "off"
        return None

    def force_off(self, step: int = 0) -> str | None:
        if self.on:
            self.on = False
            self.transitions.append((step, "off"))
            return "off"
        return None


def dual_threshold_gate(v_on: float, v_off: float) -> DualThresholdGate:
    return DualThresholdGate(v_on, v_off)


# RF combining lives in its own module; re-exported for a single import point.
from .rf import (RfScene, dft_codebook, rf_dc_power, rf_explore_exploit,  # noqa: E402
                 rf_benchmarks)

__all__ = [
    "Observation", "Decision", "SLEEP", "erasure_table", "tx_prob_table",
    "SlotPolicy", "EnergyBlind", "PeriodicMeasure", "FullyAware", "AoiThreshold",
    "energy_blind", "periodic_measure", "aoi_fully_aware", "aoi_threshold",
    "TinyModel", "TinyMLSelect", "tinyml_select", "DualThresholdGate",
    "dual_threshold_gate", "RfScene", "dft_codebook", "rf_dc_power",
    "rf_explore_exploit", "rf_benchmarks", "BLIND", "PERIODIC", "FULLY_AWARE",
    "THRESHOLD",
]
