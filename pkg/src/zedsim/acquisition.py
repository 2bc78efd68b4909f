"""Energy-information acquisition: comparators, ADC sampling, coulomb counting
and software-only time-to-event estimation.

Every method reports the energy it costs so the caller can charge it to the
``acquisition_overhead`` ledger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .energy import ContractError

BOLTZMANN = 1.380649e-23


# ---------------------------------------------------------------------------
# Threshold comparators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparatorSpec:
    """Bank of ``L`` voltage/energy comparators.

    ``g_table`` maps L to the effective number of active comparators, letting
    designs with a shared reference ladder scale sub-linearly.  Entries not in
    the table fall back to the linear worst case g(L) = L.
    """

    thresholds: tuple[float, ...]
    i_standby: float
    v_dd: float
    g_table: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        th = self.thresholds
        if len(th) < 1:
            raise ContractError("comparator needs at least one threshold")
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ContractError("comparator thresholds must be strictly increasing")
        if self.i_standby < 0 or self.v_dd <= 0:
            raise ContractError("comparator needs I_sb >= 0 and V_dd > 0")
        g = dict(self.g_table)
        if 1 in g and g[1] != 1:
            raise ContractError("g(1) must equal 1")
        prev = 1.0
        for n in sorted(g):
            if n < 1 or g[n] > n or g[n] < prev:
                raise ContractError("g must be non-decreasing with g(L) <= L")
            prev = g[n]

    @property
    def levels(self) -> int:
        return len(self.thresholds)

    def g(self, n: int) -> float:
        if n == 1:
            return 1.0
        return float(dict(self.g_table).get(n, n))


def comparator_power(spec: ComparatorSpec) -> float:
    return spec.g(spec.levels) * spec.i_standby * spec.v_dd


def comparator_observe(level: float, spec: ComparatorSpec,
                       elapsed: float = 0.0) -> tuple[tuple[bool, ...], float]:
    """Flags for every threshold reached (closed boundary) and the standby
    energy the bank drew over ``elapsed`` seconds."""
    if elapsed < 0:
        raise ContractError("elapsed time must be >= 0")
    flags = tuple(level >= th for th in spec.thresholds)
    return flags, comparator_power(spec) * elapsed


# ---------------------------------------------------------------------------
# ADC sampling
# ---------------------------------------------------------------------------

# Effective switched capacitance per architecture, in units of the unit
# capacitor, as a function of resolution N.
_CS_SCALING: dict[str, Callable[[int], float]] = {
    "sar": lambda n: 2.0**n,
    "sar-attenuated": lambda n: 2.0 ** (n / 2),
    "split-sar": lambda n: float(n),
    "flash": lambda n: 2.0**n - 1.0,
}


def switched_capacitance(bits: int, architecture: str, unit_capacitance: float) -> float:
    try:
        scale = _CS_SCALING[architecture]
    except KeyError:
        raise ContractError(f"unknown ADC architecture {architecture!r}") from None
    return unit_capacitance * scale(bits)


def thermal_noise_coefficient(temperature: float, resistance: float) -> float:
    """A = 2kTR, so that the thermal variance over a window t_m is A/t_m."""
    return 2.0 * BOLTZMANN * temperature * resistance


@dataclass(frozen=True)
class SamplerSpec:
    """ADC-based reading of the storage voltage.

    ``c_s`` may be given directly or derived from ``architecture`` and
    ``unit_capacitance``.
    """

    v_r: float
    bits: int
    v_dd: float
    t_m: float
    p_an: float = 0.0
    c_s: float | None = None
    architecture: str | None = None
    unit_capacitance: float = 0.0
    noise_a: float = 0.0
    alpha: float = 0.0  # V/K
    beta: float = 0.0  # V/s
    offset0: float = 0.0
    t0: float = 0.0
    temp0: float = 300.0

    def __post_init__(self) -> None:
        if self.t_m < 0 or (self.t_m == 0 and (self.p_an > 0 or self.noise_a > 0)):
            raise ContractError("t_m must be > 0 when P_an or thermal noise is set")
        if self.bits < 1:
            raise ContractError("ADC needs N >= 1 bits")
        if self.noise_a < 0:
            raise ContractError("thermal coefficient A must be >= 0")
        if not self.v_r > 0 or not self.v_dd > 0:
            raise ContractError("ADC needs V_r > 0 and V_dd > 0")
        if self.c_s is None and self.architecture is not None:
            object.__setattr__(self, "c_s", switched_capacitance(
                self.bits, self.architecture, self.unit_capacitance))
        if self.c_s is None:
            object.__setattr__(self, "c_s", 0.0)
        if self.c_s < 0 or self.p_an < 0:
            raise ContractError("ADC needs C_s >= 0 and P_an >= 0")

    @property
    def lsb(self) -> float:
        return self.v_r / 2**self.bits

    @property
    def thermal_variance(self) -> float:
        return self.noise_a / self.t_m if self.noise_a else 0.0

    @property
    def quantization_variance(self) -> float:
        return self.v_r**2 / (3.0 * 2.0 ** (2 * self.bits + 2))

    def offset(self, t: float, temperature: float) -> float:
        return self.offset0 + self.alpha * (temperature - self.temp0) + self.beta * (t - self.t0)


def sample_cost(spec: SamplerSpec) -> float:
    return spec.p_an * spec.t_m + spec.c_s * spec.v_dd**2


def quantize(value: float | np.ndarray, v_r: float, bits: int):
    """Mid-rise round-to-nearest onto {0, LSB, ..., (2^N - 1) LSB}.

    Returns (code_value, saturated).
    """
    lsb = v_r / 2**bits
    code = np.rint(np.asarray(value, dtype=float) / lsb)
    sat = (code < 0) | (code > 2**bits - 1)
    code = np.clip(code, 0, 2**bits - 1)
    return code * lsb, sat


class Reading(NamedTuple):
    value: float
    cost: float
    saturated: bool
    analog: float  # true + thermal + offset, before quantization


def sample_read(true_value: float, spec: SamplerSpec, t: float, temperature: float,
                rng: np.random.Generator) -> Reading:
    noise = rng.normal(0.0, np.sqrt(spec.thermal_variance)) if spec.noise_a else 0.0
    analog = true_value + noise + spec.offset(t, temperature)
    value, sat = quantize(analog, spec.v_r, spec.bits)
    # an input past the top code still rounds to it if within half an LSB
    saturated = bool(sat) or analog < -0.5 * spec.lsb or analog > spec.v_r - 0.5 * spec.lsb
    return Reading(float(value), sample_cost(spec), saturated, float(analog))


def sample_read_many(true_values: np.ndarray, spec: SamplerSpec, t: float,
                     temperature: float, rng: np.random.Generator):
    """Vectorized ``sample_read`` for a batch taken at the same (t, T)."""
    true_values = np.asarray(true_values, dtype=float)
    noise = (rng.normal(0.0, np.sqrt(spec.thermal_variance), true_values.shape)
             if spec.noise_a else np.zeros_like(true_values))
    analog = true_values + noise + spec.offset(t, temperature)
    values, sat = quantize(analog, spec.v_r, spec.bits)
    return values, analog, sat, sample_cost(spec) * true_values.size


# ---------------------------------------------------------------------------
# Coulomb counting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoulombSpec:
    quantum: float  # ΔE
    event_cost: float = 0.0  # E_v
    idle_power: float = 0.0  # P_id
    placement: str = "pre-storage"
    miss_probability: float = 0.0

    def __post_init__(self) -> None:
        if not self.quantum > 0:
            raise ContractError("coulomb quantum must be > 0")
        if self.event_cost < 0 or self.idle_power < 0:
            raise ContractError("coulomb costs must be >= 0")
        if self.placement not in ("pre-storage", "post-storage"):
            raise ContractError("placement must be pre-storage or post-storage")
        if not 0 <= self.miss_probability <= 1:
            raise ContractError("miss probability must lie in [0, 1]")


class CoulombResult(NamedTuple):
    count: int
    estimate: float
    cost: float


@dataclass
class CoulombCounter:
    """Integrator that emits one event per accumulated quantum.

    The sub-quantum remainder carries over between calls.  Post-storage
    counters accept signed flow and count up or down.
    """

    spec: CoulombSpec
    remainder: float = 0.0
    total_count: int = 0
    true_total: float = 0.0
    _rng: np.random.Generator | None = field(default=None, repr=False)

    def step(self, flow: float, t0: float, t: float) -> CoulombResult:
        if t < t0:
            raise ContractError("coulomb interval must have t >= t0")
        if flow < 0 and self.spec.placement == "pre-storage":
            raise ContractError("pre-storage counter only sees non-negative flow")
        self.true_total += flow
        acc = self.remainder + flow
        q = self.spec.quantum
        # floor in both directions keeps the remainder in [0, q)
        count = int(np.floor(acc / q))
        self.remainder = acc - count * q
        if self.spec.miss_probability and count > 0:
            rng = self._rng if self._rng is not None else np.random.default_rng(0)
            count -= int(rng.binomial(count, self.spec.miss_probability))
        self.total_count += count
        cost = (t - t0) * self.spec.idle_power + abs(count) * self.spec.event_cost
        return CoulombResult(count, count * q, cost)

    @property
    def estimate(self) -> float:
        return self.total_count * self.spec.quantum


def coulomb_step(spec: CoulombSpec, flow: float, t0: float, t: float,
                 remainder: float = 0.0) -> tuple[CoulombResult, float]:
    """Stateless form: returns the result and the new remainder."""
    counter = CoulombCounter(spec, remainder=remainder)
    res = counter.step(flow, t0, t)
    return res, counter.remainder


# ---------------------------------------------------------------------------
# Software-only estimates
# ---------------------------------------------------------------------------


def time_to_event_estimate(crossing_times: Sequence[float], threshold_gap: float) -> float | None:
    """Harvest-rate estimate from repeated threshold crossings; None when
    fewer than two crossings are available."""
    ts = np.asarray(crossing_times, dtype=float)
    if ts.size < 2:
        return None
    intervals = np.diff(ts)
    if np.any(intervals <= 0):
        raise ContractError("crossing times must be strictly increasing")
    return threshold_gap / float(intervals.mean())


@dataclass(frozen=True)
class IndirectSpec:
    """Ambient-sensor based harvest estimation.

    ``mapping`` is a monotone breakpoint table (ambient -> harvest power W).
    ``bias`` is a relative error, ``sigma`` an absolute one (W).
    """

    ambient: tuple[float, ...]
    power: tuple[float, ...]
    bias: float = 0.0
    sigma: float = 0.0
    sensor: SamplerSpec | None = None

    def __post_init__(self) -> None:
        if len(self.ambient) != len(self.power) or len(self.ambient) < 2:
            raise ContractError("indirect mapping needs >= 2 matching breakpoints")
        if np.any(np.diff(self.ambient) <= 0) or np.any(np.diff(self.power) < 0):
            raise ContractError("indirect mapping must be monotone")


def indirect_estimate(ambient_value: float, spec: IndirectSpec,
                      rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Return (harvest power estimate, acquisition energy)."""
    p = float(np.interp(ambient_value, spec.ambient, spec.power)) * (1.0 + spec.bias)
    if spec.sigma and rng is not None:
        p += rng.normal(0.0, spec.sigma)
    cost = sample_cost(spec.sensor) if spec.sensor is not None else 0.0
    return max(p, 0.0), cost
