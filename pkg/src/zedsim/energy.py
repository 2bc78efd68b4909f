"""Energy-state evolution, storage elements, and source/load circuit models.

Two numeric regimes share this module.  In the *abstract* regime energies are
integer units carried in floats, efficiencies are 1 and there is no leakage.
In the *physical* regime everything is SI (J, V, A, W, F, s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

SECONDS_PER_HOUR = 3600.0


class ContractError(ValueError):
    """Raised when an operation is called outside its preconditions."""


class BrownoutError(RuntimeError):
    """A constant-power load was asked to run below its brownout voltage."""

    def __init__(self, voltage: float, v_brownout: float):
        super().__init__(f"supply {voltage:.4g} V below brownout level {v_brownout:.4g} V")
        self.voltage = voltage
        self.v_brownout = v_brownout


# ---------------------------------------------------------------------------
# Storage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StoragePreset:
    name: str
    description: str
    capacity_range: tuple[float, float]  # J
    eta_in_range: tuple[float, float]
    eta_out_range: tuple[float, float]
    leak_range: tuple[float, float]  # fraction per hour

    @staticmethod
    def _mid(r: tuple[float, float]) -> float:
        return 0.5 * (r[0] + r[1])

    @property
    def eta_in(self) -> float:
        return self._mid(self.eta_in_range)

    @property
    def eta_out(self) -> float:
        return self._mid(self.eta_out_range)

    @property
    def leak_fraction_per_hour(self) -> float:
        return self._mid(self.leak_range)


# Rechargeable storage technologies; defaults are range midpoints.  Upper-bounded
# leakage entries ("<= x %/h") use the interval [0, x].
STORAGE_PRESETS: dict[str, StoragePreset] = {
    "capacitor": StoragePreset(
        "capacitor", "small ceramic or electrolytic capacitor (nF-uF)",
        (1e-6, 10e-3), (1.0, 1.0), (1.0, 1.0), (0.005, 0.05)),
    "supercapacitor": StoragePreset(
        "supercapacitor", "high-capacity (mF-F) capacitor",
        (0.1, 100.0), (0.85, 0.95), (0.85, 0.95), (0.005, 0.05)),
    "li-ion": StoragePreset(
        "li-ion", "Li-ion / Li-Po rechargeable battery",
        (0.5, 10e3), (0.80, 0.90), (0.85, 0.95), (0.0, 0.00005)),
    "solid-state": StoragePreset(
        "solid-state", "thin-film or printed solid-state battery",
        (1.0, 10e3), (0.75, 0.90), (0.80, 0.90), (0.0, 0.00001)),
    "hybrid": StoragePreset(
        "hybrid", "hybrid capacitor (e.g. Li-ion capacitor)",
        (0.5, 1e3), (0.85, 0.95), (0.85, 0.95), (0.0001, 0.002)),
}


@dataclass(frozen=True)
class StorageSpec:
    """Energy buffer description.

    ``capacity`` is E_M.  For ``kind == "capacitor"`` it must equal
    ``0.5 * capacitance * v_max**2``; use :meth:`capacitor` to build one.
    """

    capacity: float
    eta_in: float = 1.0
    eta_out: float = 1.0
    leak_fraction_per_hour: float = 0.0
    leak_power: float = 0.0
    kind: str = "ideal-buffer"
    capacitance: float | None = None
    v_cutoff: float = 0.0
    v_max: float | None = None
    preset: str | None = None

    def __post_init__(self) -> None:
        problems = self.violations()
        if problems:
            raise ContractError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not self.capacity > 0:
            out.append("capacity must be > 0")
        if not 0 < self.eta_in <= 1:
            out.append("eta_in must lie in (0, 1]")
        if not 0 < self.eta_out <= 1:
            out.append("eta_out must lie in (0, 1]")
        if self.leak_fraction_per_hour < 0 or self.leak_fraction_per_hour >= 1:
            out.append("leak_fraction_per_hour must lie in [0, 1)")
        if self.leak_power < 0:
            out.append("leak_power must be >= 0")
        if self.kind not in ("ideal-buffer", "capacitor"):
            out.append(f"unknown storage kind {self.kind!r}")
        if self.kind == "capacitor":
            if self.capacitance is None or not self.capacitance > 0:
                out.append("capacitor needs capacitance > 0")
            elif self.v_max is None or not self.v_max > 0:
                out.append("capacitor needs v_max > 0")
            else:
                expected = 0.5 * self.capacitance * self.v_max**2
                if not math.isclose(self.capacity, expected, rel_tol=1e-12):
                    out.append("capacitor capacity must equal C*v_max^2/2")
                if not self.v_cutoff < self.v_max:
                    out.append("v_cutoff must be below v_max")
        return out

    @classmethod
    def capacitor(cls, capacitance: float, v_max: float, v_cutoff: float = 0.0,
                  **kw) -> "StorageSpec":
        return cls(capacity=0.5 * capacitance * v_max**2, kind="capacitor",
                   capacitance=capacitance, v_max=v_max, v_cutoff=v_cutoff, **kw)

    @property
    def leak_rate(self) -> float:
        """Continuous decay rate (1/s) equivalent to the hourly fraction."""
        if self.leak_fraction_per_hour == 0:
            return 0.0
        return -math.log1p(-self.leak_fraction_per_hour) / SECONDS_PER_HOUR

    def energy_at(self, voltage: float) -> float:
        if self.kind != "capacitor":
            raise ContractError("voltage is only defined for capacitor storage")
        return 0.5 * self.capacitance * voltage**2

    def voltage_at(self, energy: float) -> float:
        if self.kind != "capacitor":
            raise ContractError("voltage is only defined for capacitor storage")
        return math.sqrt(2.0 * max(energy, 0.0) / self.capacitance)


def storage_preset(name: str, capacity: float | None = None, *,
                   capacitance: float | None = None, v_max: float | None = None,
                   v_cutoff: float = 0.0, **overrides) -> StorageSpec:
    """Build a StorageSpec from a named technology row.

    Either pass ``capacity`` (J) or ``capacitance``/``v_max`` for the two
    capacitor-type rows.
    """
    try:
        row = STORAGE_PRESETS[name]
    except KeyError:
        raise ContractError(f"unknown storage preset {name!r}; "
                            f"available: {sorted(STORAGE_PRESETS)}") from None
    kw = dict(eta_in=row.eta_in, eta_out=row.eta_out,
              leak_fraction_per_hour=row.leak_fraction_per_hour, preset=name)
    kw.update(overrides)
    if capacitance is not None:
        return StorageSpec.capacitor(capacitance, v_max, v_cutoff, **kw)
    if capacity is None:
        raise ContractError("storage preset needs a capacity or capacitance/v_max")
    return StorageSpec(capacity=capacity, v_cutoff=v_cutoff, **kw)


@dataclass(frozen=True)
class EnergyState:
    """Stored energy plus monotone ledgers.

    ``harvested`` is measured before the input efficiency, ``delivered`` after
    the output efficiency, everything else on the storage side, so that

        stored - stored_0 = eta_in*harvested - delivered/eta_out
                            - leaked - spilled - exported

    ``acquisition_overhead`` is the part of ``delivered`` spent on acquiring
    energy information.  ``exported`` is energy routed out of a small buffer
    into a larger one (hybrid mode).
    """

    stored: float
    voltage: float | None = None
    harvested: float = 0.0
    delivered: float = 0.0
    leaked: float = 0.0
    spilled: float = 0.0
    exported: float = 0.0
    acquisition_overhead: float = 0.0
    initial: float | None = None

    def __post_init__(self) -> None:
        if self.initial is None:
            object.__setattr__(self, "initial", self.stored)

    @classmethod
    def empty(cls, spec: StorageSpec, stored: float = 0.0) -> "EnergyState":
        if not 0 <= stored <= spec.capacity:
            raise ContractError("initial energy outside [0, capacity]")
        v = spec.voltage_at(stored) if spec.kind == "capacitor" else None
        return cls(stored=stored, voltage=v)

    @classmethod
    def at_voltage(cls, spec: StorageSpec, voltage: float) -> "EnergyState":
        return cls(stored=spec.energy_at(voltage), voltage=voltage)

    def balance_error(self, spec: StorageSpec) -> float:
        """Residual of the conservation identity (0 for a consistent ledger)."""
        rhs = (spec.eta_in * self.harvested - self.delivered / spec.eta_out
               - self.leaked - self.spilled - self.exported)
        return (self.stored - self.initial) - rhs


class EnergyStep(NamedTuple):
    state: EnergyState
    shortfall: float  # storage-side energy that was missing; 0 when the load ran

    @property
    def ok(self) -> bool:
        return self.shortfall == 0.0


def leak_energy(stored: float, spec: StorageSpec, dt: float) -> float:
    leak = 0.0
    if spec.leak_fraction_per_hour:
        leak += stored * -math.expm1(-spec.leak_rate * dt)
    if spec.leak_power:
        leak += spec.leak_power * dt
    return min(leak, stored)


def step_energy(state: EnergyState, spec: StorageSpec, harvested: float,
                load: float, dt: float, *, acquisition: float = 0.0,
                partial: bool = False) -> EnergyStep:
    """Advance the store by one interval.

    ``load`` and ``acquisition`` are load-side energies.  If the store cannot
    cover them the consumption does not happen (atomic failure) and the
    returned shortfall is positive; with ``partial=True`` whatever is
    available is drained instead (the attempt still reports its shortfall).
    """
    if harvested < 0 or load < 0 or acquisition < 0:
        raise ContractError("harvested and load energies must be non-negative")
    if not dt > 0:
        raise ContractError("dt must be positive")

    leak = leak_energy(state.stored, spec, dt)
    available = state.stored + spec.eta_in * harvested - leak
    demand = (load + acquisition) / spec.eta_out
    shortfall = 0.0
    acq_done = acquisition
    if demand > available:
        shortfall = demand - available
        if partial:
            drawn = available
            load_done = drawn * spec.eta_out
            # acquisition is served first when the draw is truncated
            acq_done = min(acquisition, load_done)
        else:
            drawn = 0.0
            load_done = 0.0
            acq_done = 0.0
    else:
        drawn = demand
        load_done = load + acquisition

    stored = available - drawn
    spill = 0.0
    if stored > spec.capacity:
        spill = stored - spec.capacity
        stored = spec.capacity
    stored = max(stored, 0.0)

    new = replace(
        state,
        stored=stored,
        voltage=spec.voltage_at(stored) if spec.kind == "capacitor" else None,
        harvested=state.harvested + harvested,
        delivered=state.delivered + load_done,
        leaked=state.leaked + leak,
        spilled=state.spilled + spill,
        acquisition_overhead=state.acquisition_overhead + acq_done,
    )
    return EnergyStep(new, shortfall)


def shc_step(state: EnergyState, spec: StorageSpec, phase: str, harvested: float,
             load: float, dt: float, **kw) -> EnergyStep:
    """Sequential harvest-then-consume: the load or the harvester is disconnected."""
    if phase == "harvest":
        return step_energy(state, spec, harvested, 0.0, dt, **kw)
    if phase == "consume":
        return step_energy(state, spec, 0.0, load, dt, **kw)
    raise ContractError(f"SHC phase must be 'harvest' or 'consume', not {phase!r}")


@dataclass(frozen=True)
class HybridBuffers:
    """Two-stage (HHC) storage: a small immediate buffer feeding a large one."""

    small: StorageSpec
    large: StorageSpec

    def __post_init__(self) -> None:
        if not self.small.capacity < self.large.capacity:
            raise ContractError("hybrid mode needs small capacity < large capacity")


class HybridStep(NamedTuple):
    small: EnergyState
    large: EnergyState
    exported: float
    small_shortfall: float
    large_shortfall: float


def hhc_step(small: EnergyState, large: EnergyState, buffers: HybridBuffers,
             harvested: float, load_immediate: float, load_deferred: float,
             dt: float) -> HybridStep:
    """Hybrid harvest-consume step.

    The small buffer runs concurrent bookkeeping with its overflow exported to
    the large buffer, which sees that overflow as its harvest input.
    """
    s_spec, l_spec = buffers.small, buffers.large
    s_step = step_energy(small, s_spec, harvested, load_immediate, dt)
    s_state = s_step.state
    excess = s_state.spilled - small.spilled
    if excess > 0:
        s_state = replace(s_state, spilled=small.spilled, exported=small.exported + excess)
    l_step = step_energy(large, l_spec, excess, load_deferred, dt)
    return HybridStep(s_state, l_step.state, excess, s_step.shortfall, l_step.shortfall)


# ---------------------------------------------------------------------------
# Capacitor laws
# ---------------------------------------------------------------------------


def capacitor_energy(capacitance: float, voltage: float) -> float:
    if not capacitance > 0 or voltage < 0:
        raise ContractError("need C > 0 and V >= 0")
    return 0.5 * capacitance * voltage**2


def capacitor_usable_energy(capacitance: float, voltage: float, v_cutoff: float) -> float:
    """Energy above the cut-off voltage; 0 when the device sits below cut-off."""
    if not capacitance > 0 or voltage < 0:
        raise ContractError("need C > 0 and V >= 0")
    if voltage <= v_cutoff:
        return 0.0
    return 0.5 * capacitance * (voltage**2 - v_cutoff**2)


def below_cutoff(voltage: float, v_cutoff: float) -> bool:
    return voltage < v_cutoff


def rc_transition(voltage: float, current: float, r_load: float, capacitance: float,
                  duration: float) -> float:
    """Capacitor voltage after running a resistive load while a constant
    current charges it."""
    if not r_load > 0 or not capacitance > 0 or duration < 0:
        raise ContractError("need R_L > 0, C > 0, T_L >= 0")
    decay = math.exp(-duration / (r_load * capacitance))
    return current * r_load * (1.0 - decay) + voltage * decay


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantCurrentSource:
    current: float
    kind: str = field(default="CI", init=False)

    def __post_init__(self) -> None:
        if self.current < 0:
            raise ContractError("CI source current must be >= 0")

    def current_at(self, voltage: float, t: float = 0.0) -> float:
        return self.current


@dataclass(frozen=True)
class ConstantVoltageSource:
    """Regulated source behind a series resistance ``r_src``."""

    voltage: float
    r_src: float = 1.0
    kind: str = field(default="CV", init=False)

    def __post_init__(self) -> None:
        if not self.voltage > 0 or not self.r_src > 0:
            raise ContractError("CV source needs V_S > 0 and R_src > 0")

    def current_at(self, voltage: float, t: float = 0.0) -> float:
        if voltage >= self.voltage:
            return 0.0
        return (self.voltage - voltage) / self.r_src


@dataclass(frozen=True)
class ConstantPowerSource:
    """MPPT-style source.  Current is capped at ``i_max`` near 0 V.

    Without an explicit cap, ``i_max`` defaults to ten times the current at
    ``v_ref`` (normally the storage cut-off voltage).
    """

    power: float
    v_ref: float | None = None
    i_max: float | None = None
    kind: str = field(default="CP", init=False)

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ContractError("CP source power must be >= 0")
        if self.i_max is None:
            if self.v_ref is None or not self.v_ref > 0:
                raise ContractError("CP source needs i_max or a positive v_ref")
            object.__setattr__(self, "i_max", 10.0 * self.power / self.v_ref)

    def current_at(self, voltage: float, t: float = 0.0) -> float:
        if voltage <= 0:
            return self.i_max
        return min(self.power / voltage, self.i_max)


@dataclass(frozen=True)
class VariableOutputSource:
    """Unregulated source replayed from (t, V_S, I_S) samples."""

    times: tuple[float, ...]
    voltages: tuple[float, ...]
    currents: tuple[float, ...]
    kind: str = field(default="VO", init=False)

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        if not (len(self.times) == len(self.voltages) == len(self.currents) >= 1):
            raise ContractError("VO trace columns must have equal, non-zero length")
        if np.any(np.diff(t) <= 0):
            raise ContractError("VO trace timestamps must be strictly increasing")

    def current_at(self, voltage: float, t: float = 0.0) -> float:
        v_s = float(np.interp(t, self.times, self.voltages))
        if v_s <= voltage:
            return 0.0
        return float(np.interp(t, self.times, self.currents))


SourceModel = ConstantCurrentSource | ConstantVoltageSource | ConstantPowerSource | VariableOutputSource


def source_current(source: SourceModel, voltage: float, t: float = 0.0) -> float:
    if voltage < 0:
        raise ContractError("storage voltage must be >= 0")
    return source.current_at(voltage, t)


# ---------------------------------------------------------------------------
# Loads
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResistiveLoad:
    resistance: float
    kind: str = field(default="CR", init=False)

    def __post_init__(self) -> None:
        if not self.resistance > 0:
            raise ContractError("CR load needs R_L > 0")

    def power_at(self, voltage: float) -> float:
        return voltage * voltage / self.resistance


@dataclass(frozen=True)
class CurrentLoad:
    current: float
    kind: str = field(default="CI", init=False)

    def __post_init__(self) -> None:
        if self.current < 0:
            raise ContractError("CI load needs I_L >= 0")

    def power_at(self, voltage: float) -> float:
        return voltage * self.current


@dataclass(frozen=True)
class PowerLoad:
    power: float
    v_brownout: float = 0.0
    kind: str = field(default="CP", init=False)

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ContractError("CP load needs P_L >= 0")

    def power_at(self, voltage: float) -> float:
        if voltage < self.v_brownout or (voltage <= 0 and self.power > 0):
            raise BrownoutError(voltage, self.v_brownout)
        return self.power


@dataclass(frozen=True)
class CompositeLoad:
    parts: tuple[tuple[float, "LoadModel"], ...]
    kind: str = field(default="composite", init=False)

    def __post_init__(self) -> None:
        if any(w < 0 for w, _ in self.parts):
            raise ContractError("composite load weights must be >= 0")

    def power_at(self, voltage: float) -> float:
        return sum(w * part.power_at(voltage) for w, part in self.parts)


LoadModel = ResistiveLoad | CurrentLoad | PowerLoad | CompositeLoad


def load_power(load: LoadModel, voltage: float) -> float:
    if voltage < 0:
        raise ContractError("storage voltage must be >= 0")
    return load.power_at(voltage)


def _load_current(load: LoadModel | None, voltage: float) -> float:
    if load is None:
        return 0.0
    try:
        p = load.power_at(voltage)
    except BrownoutError:
        return 0.0
    if isinstance(load, ResistiveLoad):
        return voltage / load.resistance
    if isinstance(load, CurrentLoad):
        return load.current
    return p / voltage if voltage > 0 else 0.0


def integrate_circuit(state: EnergyState, source: SourceModel | None,
                      load: LoadModel | None, spec: StorageSpec, dt: float,
                      substeps: int = 1000, t0: float = 0.0) -> EnergyState:
    """Integrate C dV/dt = I_src(V) - I_load(V) - I_leak(V) over ``dt``.

    Classic RK4 on equal sub-intervals.  The storage-side harvest and leak are
    integrated alongside; the load ledger takes the quadrature residual so the
    conservation identity closes exactly.  Voltages leaving [0, v_max] are
    clamped and booked as spill or as a reduced delivery.
    """
    if spec.kind != "capacitor":
        raise ContractError("integrate_circuit needs capacitor storage")
    if substeps < 1 or not dt > 0:
        raise ContractError("need substeps >= 1 and dt > 0")
    c = spec.capacitance
    k = spec.leak_rate
    h = dt / substeps

    def rates(v: float, t: float) -> tuple[float, float, float, float]:
        v = max(v, 0.0)
        i_src = source.current_at(v, t) if source is not None else 0.0
        i_load = _load_current(load, v)
        i_leak = 0.5 * k * c * v + (spec.leak_power / v if spec.leak_power and v > 0 else 0.0)
        return (i_src - i_load - i_leak) / c, i_src * v, i_load * v, i_leak * v

    v = state.voltage if state.voltage is not None else spec.voltage_at(state.stored)
    harvested = delivered = leaked = spilled = 0.0
    t = t0
    for _ in range(substeps):
        k1 = rates(v, t)
        k2 = rates(v + 0.5 * h * k1[0], t + 0.5 * h)
        k3 = rates(v + 0.5 * h * k2[0], t + 0.5 * h)
        k4 = rates(v + h * k3[0], t + h)
        w = [(a + 2 * b + 2 * cc + d) * h / 6.0 for a, b, cc, d in zip(k1, k2, k3, k4)]
        v_new = v + w[0]
        e_in, e_out, e_leak = w[1], w[2], w[3]
        spill = 0.0
        if v_new > spec.v_max:
            spill = 0.5 * c * (v_new**2 - spec.v_max**2)
            v_new = spec.v_max
        if v_new < 0:
            v_new = 0.0
        delta = 0.5 * c * (v_new**2 - v**2)
        # book the quadrature residual on the load side (or the source side
        # when no load is drawing) so the identity holds exactly
        if e_out > 0 or not e_in > 0:
            e_out = max(e_in - e_leak - spill - delta, 0.0)
            e_leak = e_in - e_out - spill - delta
        else:
            e_in = delta + e_out + e_leak + spill
        harvested += e_in
        delivered += e_out
        leaked += e_leak
        spilled += spill
        v = v_new
        t += h

    stored = 0.5 * c * v * v
    return replace(
        state,
        stored=stored,
        voltage=v,
        harvested=state.harvested + harvested / spec.eta_in,
        delivered=state.delivered + delivered * spec.eta_out,
        leaked=state.leaked + leaked,
        spilled=state.spilled + spilled,
    )

