"""Energy and time cost models for sensing, computation, communication and
actuation, plus the atomic-unit splitting rules used by schedulers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .energy import ContractError

# ---------------------------------------------------------------------------
# Sensing
# ---------------------------------------------------------------------------

SENSOR_STATES = ("sleep", "wake", "measure", "convert")


@dataclass(frozen=True)
class SensingProfile:
    """Per-state currents (A) and durations (s) of one sensing cycle.

    ``period`` set means periodic triggering: the sleep state fills the rest
    of the period and is charged to the reading.  On-demand sensing leaves the
    sleep draw to device standby.
    """

    v_dd: float
    currents: dict[str, float]
    durations: dict[str, float]
    period: float | None = None

    def __post_init__(self) -> None:
        for name in list(self.currents) + list(self.durations):
            if name not in SENSOR_STATES:
                raise ContractError(f"unknown sensor state {name!r}")
        if any(v < 0 for v in self.currents.values()) or any(
                v < 0 for v in self.durations.values()):
            raise ContractError("sensor currents and durations must be >= 0")
        if self.v_dd <= 0:
            raise ContractError("V_dd must be > 0")
        if self.period is not None and self.period < self.active_time:
            raise ContractError("sensing period shorter than the active states")

    @property
    def active_time(self) -> float:
        return sum(self.durations.get(s, 0.0) for s in SENSOR_STATES[1:])

    def state_energy(self, state: str) -> float:
        return self.v_dd * self.currents.get(state, 0.0) * self.durations.get(state, 0.0)


def sensing_energy(profile: SensingProfile) -> tuple[float, float]:
    energy = sum(profile.state_energy(s) for s in SENSOR_STATES[1:])
    duration = profile.active_time
    if profile.period is not None:
        sleep_t = profile.period - duration
        energy += profile.v_dd * profile.currents.get("sleep", 0.0) * sleep_t
        duration = profile.period
    return energy, duration


# ---------------------------------------------------------------------------
# Computation
# ---------------------------------------------------------------------------


def _clog2(n: int) -> int:
    return math.ceil(math.log2(n)) if n >= 2 else 0


# Cycle scaling per task kind: (n, k) -> work units.
CYCLE_SCALING = {
    "o1": lambda n, k: 1,
    "on": lambda n, k: n,
    "onk": lambda n, k: n * k,
    "onlogn": lambda n, k: n * _clog2(n),
    "on_klogk": lambda n, k: n + k * _clog2(k),
    "on2": lambda n, k: n * n,
    "on3": lambda n, k: n**3,
}

# Named programmable tasks mapped to their complexity class.
TASK_KINDS = {
    "threshold-check": "o1",
    "timer-interrupt": "o1",
    "scheduler-tick": "o1",
    "crc8": "on",
    "delta-encoding": "on",
    "run-length-encoding": "on",
    "minmax-search": "on",
    "moving-average": "onk",
    "histogram": "on_klogk",
    "fir": "onk",
    "fft": "onlogn",
    "autocorrelation": "on2",
    "kmeans-update": "onk",
    "cnn": "onk",
    "binary-classifier": "on2",
    "hmac": "on",
    "ecc-scalar-mult": "on2",
    "rsa-encrypt": "on3",
}


def compute_cycles(kind: str, n: int, k: int = 0, c: float = 1.0) -> float:
    if n < 0 or k < 0:
        raise ContractError("input sizes must be >= 0")
    cls = TASK_KINDS.get(kind, kind)
    try:
        scale = CYCLE_SCALING[cls]
    except KeyError:
        raise ContractError(f"unknown task kind {kind!r}") from None
    return c * scale(n, k)


@dataclass(frozen=True)
class ComputeProfile:
    mode: str = "fixed"  # fixed | dvfs
    gamma: float = 1.0
    c_s: float = 0.0
    v_dd: float = 1.0
    frequency: float = 1e6
    i_leak: float = 0.0
    gamma_dvfs: float = 0.0  # J/Hz^2

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "dvfs"):
            raise ContractError("compute mode must be fixed or dvfs")
        if not 0 < self.gamma <= 1:
            raise ContractError("activity factor must lie in (0, 1]")
        if not self.frequency > 0:
            raise ContractError("clock frequency must be > 0")
        if self.c_s < 0 or self.i_leak < 0 or self.gamma_dvfs < 0:
            raise ContractError("capacitance, leakage and gamma' must be >= 0")

    def power(self) -> float:
        if self.mode == "dvfs":
            return self.gamma_dvfs * self.frequency**3
        return (self.gamma * self.c_s * self.v_dd**2 * self.frequency
                + self.i_leak * self.v_dd)


def compute_energy(profile: ComputeProfile, n_cycles: float) -> tuple[float, float]:
    if n_cycles < 0:
        raise ContractError("cycle count must be >= 0")
    t = n_cycles / profile.frequency
    if profile.mode == "dvfs":
        return profile.gamma_dvfs * profile.frequency**2 * n_cycles, t
    dynamic = profile.gamma * profile.c_s * profile.v_dd**2 * n_cycles
    static = profile.i_leak * profile.v_dd * t
    return dynamic + static, t


# ---------------------------------------------------------------------------
# Communication
# ---------------------------------------------------------------------------

COMM_STATES = ("deep-sleep", "idle", "prepare-tx", "tx", "prepare-rx", "rx")

COMM_TEMPLATES = {
    "tx": ("deep-sleep", "idle", "prepare-tx", "tx", "deep-sleep"),
    "tx-ack": ("deep-sleep", "idle", "prepare-tx", "tx", "prepare-rx", "rx", "deep-sleep"),
    "rx-poll": ("deep-sleep", "idle", "prepare-rx", "rx", "deep-sleep"),
}


@dataclass(frozen=True)
class CommProfile:
    """Power (W) and dwell time (s) per radio state."""

    power: dict[str, float]
    duration: dict[str, float]

    def __post_init__(self) -> None:
        for name in list(self.power) + list(self.duration):
            if name not in COMM_STATES:
                raise ContractError(f"unknown radio state {name!r}")
        if any(v < 0 for v in self.power.values()) or any(
                v < 0 for v in self.duration.values()):
            raise ContractError("radio powers and durations must be >= 0")

    @classmethod
    def from_currents(cls, v_dd: float, currents: dict[str, float],
                      duration: dict[str, float]) -> "CommProfile":
        return cls({s: v_dd * i for s, i in currents.items()}, dict(duration))


def comm_transaction(profile: CommProfile,
                     template: str | Sequence[str]) -> tuple[float, float]:
    states = COMM_TEMPLATES[template] if isinstance(template, str) else tuple(template)
    if not states or states[0] != "deep-sleep" or states[-1] != "deep-sleep":
        raise ContractError("a transaction must start and end in deep-sleep")
    energy = 0.0
    duration = 0.0
    # the bracketing deep-sleep states mark the boundaries and are not charged
    for s in states[1:-1]:
        if s not in COMM_STATES:
            raise ContractError(f"unknown radio state {s!r}")
        t = profile.duration.get(s, 0.0)
        energy += profile.power.get(s, 0.0) * t
        duration += t
    return energy, duration


# LoRaWAN-like radio at 3.3 V.  The ACK window current is the midpoint of a
# 17-28 mA range.  Rejoin is a separate lump (13 mA for 13 s).
LORAWAN_V = 3.3
LORAWAN_LIKE = CommProfile.from_currents(
    LORAWAN_V,
    {"deep-sleep": 0.4e-6, "idle": 17e-3, "prepare-tx": 17e-3, "tx": 50e-3,
     "prepare-rx": 17e-3, "rx": 22.5e-3},
    {"idle": 8e-3, "prepare-tx": 0.0, "tx": 50e-3, "prepare-rx": 1e-3, "rx": 30e-3},
)
LORAWAN_REJOIN_J = LORAWAN_V * 13e-3 * 13.0

COMM_PRESETS = {"lorawan-like": LORAWAN_LIKE}


# ---------------------------------------------------------------------------
# Actuation
# ---------------------------------------------------------------------------


class StallError(ContractError):
    """Servo load torque at or above stall torque."""


@dataclass(frozen=True)
class ActuatorProfile:
    kind: str
    params: dict[str, float]

    _REQUIRED = {
        "mems": ("c_m", "v1", "v2"),
        "led": ("v_f", "i_f", "t"),
        "piezo": ("c_p", "v_d"),
        "solenoid": ("r_c", "v_op", "t_p"),
        "eink": (),
        "sma": ("r_l", "i_r", "delta_t", "m_cp"),
        "servo": ("v_s", "i_0", "i_s", "k_t", "omega_0", "theta", "tau_l", "i_hl", "t_hl"),
    }

    def __post_init__(self) -> None:
        if self.kind not in self._REQUIRED:
            raise ContractError(f"unknown actuator class {self.kind!r}")
        missing = [k for k in self._REQUIRED[self.kind] if k not in self.params]
        if self.kind == "eink" and not ({"v_d", "i_u", "t_u"} <= set(self.params)
                                        or {"area", "e_area"} <= set(self.params)):
            missing.append("v_d/i_u/t_u or area/e_area")
        if missing:
            raise ContractError(f"{self.kind} actuator missing {missing}")
        if any(v < 0 for v in self.params.values()):
            raise ContractError("actuator parameters must be >= 0")
        for name in ("r_c", "r_l", "k_t", "omega_0", "i_s"):
            if name in self.params and not self.params[name] > 0:
                raise ContractError(f"{name} must be > 0")


def servo_lambda(p: dict[str, float]) -> float:
    return p["tau_l"] / (p["k_t"] * p["i_s"])


def actuator_energy(profile: ActuatorProfile) -> tuple[float, float]:
    p = profile.params
    k = profile.kind
    if k == "mems":
        return p["c_m"] * (p["v1"] ** 2 - p["v2"] ** 2) / 2.0, p.get("t", 0.0)
    if k == "led":
        return p["v_f"] * p["i_f"] * p["t"], p["t"]
    if k == "piezo":
        return p["c_p"] * p["v_d"] ** 2 / 2.0, p.get("t", 0.0)
    if k == "solenoid":
        return p["v_op"] ** 2 * p["t_p"] / p["r_c"], p["t_p"]
    if k == "eink":
        if "v_d" in p:
            return p["v_d"] * p["i_u"] * p["t_u"], p["t_u"]
        return p["area"] * p["e_area"], p.get("t_u", 0.0)
    if k == "sma":
        heat_power = p["i_r"] ** 2 * p["r_l"]
        t_heat = p["m_cp"] * p["delta_t"] / heat_power
        return heat_power * t_heat, t_heat
    lam = servo_lambda(p)
    if lam >= 1:
        raise StallError(f"servo load ratio {lam:.3g} >= 1 (stall)")
    i_avg = p["i_0"] + p["tau_l"] / p["k_t"]
    t_mv = p["theta"] / (p["omega_0"] * (1.0 - lam))
    e_move = p["v_s"] * i_avg * t_mv
    e_hold = p["v_s"] * p["i_hl"] * p["t_hl"]
    return e_move + e_hold, t_mv + p["t_hl"]


def servo_breakdown(profile: ActuatorProfile) -> dict[str, float]:
    p = profile.params
    lam = servo_lambda(p)
    if lam >= 1:
        raise StallError(f"servo load ratio {lam:.3g} >= 1 (stall)")
    i_avg = p["i_0"] + p["tau_l"] / p["k_t"]
    t_mv = p["theta"] / (p["omega_0"] * (1.0 - lam))
    return {"lambda": lam, "i_avg": i_avg, "t_mv": t_mv,
            "e_move": p["v_s"] * i_avg * t_mv, "e_hold": p["v_s"] * p["i_hl"] * p["t_hl"]}


# Servo τ_L and θ are not published with the datasheet row.  They are chosen so
# that I_avg = I_0 + τ_L/K_t = 0.21 A and t_mv = θ/(ω0(1-λ)) = 0.25 s:
#   τ_L = 0.17 A * 0.29 N·m/A = 0.0493 N·m, λ = 0.0493/(0.29*0.6) ≈ 0.2833,
#   θ = 0.25 s * 8.7 rad/s * (1 - λ) ≈ 1.5588 rad.
_SERVO_TAU = 0.17 * 0.29
_SERVO_THETA = 0.25 * 8.7 * (1.0 - _SERVO_TAU / (0.29 * 0.6))

ACTUATOR_PRESETS: dict[str, ActuatorProfile] = {
    "mems.mirror": ActuatorProfile("mems", {"c_m": 100e-12, "v1": 70.0, "v2": 0.0}),
    "led.kingbright": ActuatorProfile("led", {"v_f": 2.0, "i_f": 10e-3, "t": 20e-3}),
    "piezo.powerhap": ActuatorProfile("piezo", {"c_p": 0.5e-6, "v_d": 60.0}),
    "solenoid.latching": ActuatorProfile("solenoid", {"v_op": 5.0, "r_c": 160.0, "t_p": 20e-3}),
    "eink.154": ActuatorProfile("eink", {"v_d": 3.3, "i_u": 18e-3, "t_u": 0.5}),
    "sma.wire100um": ActuatorProfile("sma", {"r_l": 6.2, "i_r": 0.25, "delta_t": 50.0,
                                              "m_cp": 1.62e-3}),
    "servo.sg90": ActuatorProfile("servo", {
        "v_s": 5.0, "i_0": 0.04, "i_s": 0.6, "k_t": 0.29, "omega_0": 8.7,
        "theta": _SERVO_THETA, "tau_l": _SERVO_TAU, "i_hl": 0.15, "t_hl": 1.0}),
}


# ---------------------------------------------------------------------------
# Task specs and splitting
# ---------------------------------------------------------------------------

GRANULARITIES = ("per-task", "per-phase", "per-instruction", "per-cycle")
TASK_CLASSES = ("intermittent", "capacity-constrained", "temporally-constrained")


@dataclass(frozen=True)
class TaskSpec:
    id: str
    cost: float
    duration: float = 0.0
    atomic: bool = True
    granularity: str = "per-task"
    phases: tuple["TaskSpec", ...] = ()
    deadline: float | None = None
    checkpoint_cost: float = 0.0
    quantum: float | None = None
    task_class: str = "intermittent"

    def __post_init__(self) -> None:
        if self.cost < 0 or self.checkpoint_cost < 0 or self.duration < 0:
            raise ContractError("task cost, duration and checkpoint cost must be >= 0")
        if self.granularity not in GRANULARITIES:
            raise ContractError(f"unknown granularity {self.granularity!r}")
        if self.task_class not in TASK_CLASSES:
            raise ContractError(f"unknown task class {self.task_class!r}")
        if self.phases and not math.isclose(sum(p.cost for p in self.phases), self.cost,
                                            rel_tol=1e-12, abs_tol=1e-15):
            raise ContractError("phase costs must sum to the task cost")
        if self.quantum is not None and not self.quantum > 0:
            raise ContractError("split quantum must be > 0")


@dataclass(frozen=True)
class Unit:
    """One atomic unit of work, optionally followed by a checkpoint."""

    task_id: str
    cost: float
    checkpoint: float = 0.0

    @property
    def charged(self) -> float:
        return self.cost + self.checkpoint


def split_task(task: TaskSpec) -> list[Unit]:
    if task.granularity == "per-task":
        return [Unit(task.id, task.cost)]
    if task.atomic:
        raise ContractError(f"atomic task {task.id!r} cannot be split "
                            f"at {task.granularity} granularity")
    if task.granularity == "per-phase":
        if not task.phases:
            raise ContractError("per-phase split needs phases")
        return [Unit(f"{task.id}.{p.id}", p.cost) for p in task.phases]
    # per-instruction / per-cycle: fixed quanta with checkpoints in between
    q = task.quantum
    if q is None:
        raise ContractError("fine-grained split needs a quantum")
    n_full = int(task.cost // q)
    rest = task.cost - n_full * q
    costs = [q] * n_full + ([rest] if rest > 1e-12 * max(task.cost, 1.0) else [])
    if not costs:
        costs = [task.cost]
    return [Unit(f"{task.id}.{i}", c, task.checkpoint_cost if i < len(costs) - 1 else 0.0)
            for i, c in enumerate(costs)]


def total_charged(units: Iterable[Unit]) -> float:
    return sum(u.charged for u in units)


# Security tasks as generic profiles.  Energy class -> nominal cost (J) is a
# calibration assumption: low 0.1 mJ, medium 1 mJ, high 10 mJ.  Low interrupt
# tolerance makes the task atomic; tight timing sets a deadline (s).
_ENERGY_CLASS = {"low": 1e-4, "low-medium": 5e-4, "medium": 1e-3,
                 "medium-high": 5e-3, "high": 1e-2}

SECURITY_PRESETS: dict[str, TaskSpec] = {
    "security.authentication": TaskSpec(
        "authentication", _ENERGY_CLASS["medium-high"], atomic=True, deadline=1.0,
        task_class="temporally-constrained"),
    "security.encryption": TaskSpec(
        "encryption", _ENERGY_CLASS["medium"], atomic=False, granularity="per-instruction",
        quantum=_ENERGY_CLASS["medium"] / 4, checkpoint_cost=1e-5, deadline=10.0),
    "security.key-generation": TaskSpec(
        "key-generation", _ENERGY_CLASS["high"], atomic=True, deadline=1.0,
        task_class="temporally-constrained"),
    "security.key-exchange": TaskSpec(
        "key-exchange", _ENERGY_CLASS["high"], atomic=True, deadline=1.0,
        task_class="temporally-constrained"),
    "security.integrity-check": TaskSpec(
        "integrity-check", _ENERGY_CLASS["low-medium"], atomic=False,
        granularity="per-instruction", quantum=_ENERGY_CLASS["low-medium"] / 2),
    "security.access-control": TaskSpec(
        "access-control", _ENERGY_CLASS["low-medium"], atomic=False,
        granularity="per-instruction", quantum=_ENERGY_CLASS["low-medium"] / 2,
        deadline=60.0),
    "security.secure-boot": TaskSpec(
        "secure-boot", _ENERGY_CLASS["medium-high"], atomic=True,
        task_class="capacity-constrained"),
}


# Named compute presets, c = 1 cycle per unit work by default.
def compute_preset(kind: str, n: int, k: int = 0, c: float = 1.0,
                   profile: ComputeProfile | None = None) -> tuple[float, float]:
    profile = profile or ComputeProfile(gamma=0.5, c_s=10e-12, v_dd=3.0, frequency=1e6)
    return compute_energy(profile, compute_cycles(kind, n, k, c))


def profile_preset(name: str):
    """Look up a task-model preset by dotted name (actuator, security, comm)."""
    for table in (ACTUATOR_PRESETS, SECURITY_PRESETS, COMM_PRESETS):
        if name in table:
            return table[name]
    raise ContractError(f"unknown task preset {name!r}")
