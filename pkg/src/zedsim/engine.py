"""Slotted multi-device simulation loop, arrival processes, shared channel and
metric collection.

Within a slot the order is fixed: arrivals (energy, then tasks/events),
observation (acquisition costs paid), decision, then settlement (channel
resolution, AoI and counters).  Slots are numbered from 0.

Random draws come from per-(device, label) streams (see :mod:`zedsim.rng`)
and are generated in blocks shared by the reference loop and the compiled
kernels, so both routes see identical inputs.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import kernels as K
from .config import ConfigError, ScenarioConfig, check_path, validate
from .policies import (AoiThreshold, Decision, EnergyBlind, FullyAware, Observation,
                       PeriodicMeasure, SlotPolicy, erasure_table, tx_prob_table)
from .rng import rng_stream

BLOCK = 4096
MAX_GAP = 1 << 40

METRIC_COLUMNS = ("task_completion_rate", "avg_aoi", "net_harvested_power_W",
                  "throughput_pph", "restart_count")
LEDGER_COLUMNS = ("stored_initial", "stored_final", "harvested", "delivered", "leaked",
                  "spilled", "acquisition_overhead")


@dataclass
class Metrics:
    workload: str
    slots: int
    task_completion_rate: float | None = None
    avg_aoi: float | None = None
    net_harvested_power_W: float | None = None
    throughput_pph: float | None = None
    restart_count: int | None = None
    ledger: dict[str, float] = field(default_factory=dict)
    counters: dict[str, int] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)
    trace: list[dict] | None = None

    def row(self) -> dict[str, Any]:
        out = {k: getattr(self, k) for k in METRIC_COLUMNS}
        out.update({k: self.ledger.get(k) for k in LEDGER_COLUMNS})
        out.update(self.extra)
        return out

    def summary(self, cfg: ScenarioConfig) -> dict[str, Any]:
        """JSON-ready record with a frozen key order."""
        return {
            "schema": 1,
            "name": cfg.name,
            "workload": self.workload,
            "seed": cfg.seed,
            "slots": self.slots,
            "n_devices": cfg.n_devices,
            "metrics": {k: getattr(self, k) for k in METRIC_COLUMNS},
            "ledger": {k: self.ledger.get(k) for k in LEDGER_COLUMNS},
            "counters": dict(sorted(self.counters.items())),
            "extra": dict(self.extra),
        }


def aoi_update(aoi: int, generated_at: int, received: bool, now: int) -> int:
    """Age after the end of slot ``now``; a reception resets it to the age of
    the delivered packet (1 if generated in the same slot)."""
    if generated_at > now:
        raise ValueError("packet generated after the current slot")
    return now - generated_at + 1 if received else aoi + 1


# ---------------------------------------------------------------------------
# Arrival streams
# ---------------------------------------------------------------------------


class BernoulliStream:
    """Bernoulli(p) per slot, drawn as geometric gaps so sparse streams are
    cheap.  Gaps already drawn are kept across blocks."""

    def __init__(self, rng: np.random.Generator, p: float):
        self.rng = rng
        self.p = p
        self.last = -1
        self.pending = np.empty(0, dtype=np.int64)

    def block(self, start: int, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.int64)
        if self.p <= 0.0:
            return out
        end = start + n
        while self.pending.size == 0 or self.pending[-1] < end:
            k = int(n * self.p * 1.25) + 16
            # gaps saturate at int64 max for tiny p; cap them well past any run
            gaps = np.minimum(self.rng.geometric(self.p, k), MAX_GAP)
            pos = self.last + np.cumsum(gaps)
            self.last = int(pos[-1])
            self.pending = np.concatenate([self.pending, pos])
        cut = int(np.searchsorted(self.pending, end))
        out[self.pending[:cut] - start] = 1
        self.pending = self.pending[cut:]
        return out


class EnergyStream:
    def __init__(self, cfg, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.bern = BernoulliStream(rng, cfg.p) if cfg.process == "bernoulli" else None

    def block(self, start: int, n: int) -> np.ndarray:
        c = self.cfg
        if c.process == "poisson":
            return self.rng.poisson(c.mean_units, n).astype(np.int64)
        if c.process == "bernoulli":
            return self.bern.block(start, n) * c.units
        if c.process == "deterministic":
            return np.full(n, c.units, dtype=np.int64)
        return _trace_block(c.trace_units, start, n)


class TaskStream:
    def __init__(self, process: str, p: float, trace: Sequence[int], rng: np.random.Generator):
        self.process = process
        self.trace = trace
        self.bern = BernoulliStream(rng, p) if process == "bernoulli" else None

    def block(self, start: int, n: int) -> np.ndarray:
        if self.process == "bernoulli":
            return self.bern.block(start, n)
        return np.minimum(_trace_block(self.trace, start, n), 1)


def _trace_block(trace: Sequence[int], start: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    seg = np.asarray(trace[start:start + n], dtype=np.int64)
    out[:seg.size] = seg
    return out


class UniformBuffer:
    """Per-device on-demand uniforms.  Holds at least ``cap`` unread values per
    device at the start of every block (at most one is used per slot)."""

    def __init__(self, gens: list[np.random.Generator], cap: int = BLOCK):
        self.gens = gens
        self.cap = cap
        self.values = np.stack([g.random(cap) for g in gens])
        self.cursor = np.zeros(len(gens), dtype=np.int64)

    def refill(self) -> None:
        cap = self.cap
        for d, c in enumerate(self.cursor):
            if c:
                self.values[d, :cap - c] = self.values[d, c:]
                self.values[d, cap - c:] = self.gens[d].random(c)
        self.cursor[:] = 0

    def draw(self, d: int) -> float:
        v = self.values[d, self.cursor[d]]
        self.cursor[d] += 1
        return float(v)


# ---------------------------------------------------------------------------
# Abstract workloads
# ---------------------------------------------------------------------------


def build_slot_policy(cfg: ScenarioConfig) -> SlotPolicy:
    p, w = cfg.policy, cfg.workload
    cap = cfg.storage.capacity_units
    if w.kind == "tasks":
        if p.name == "energy_blind":
            return EnergyBlind(p.period_slots, w.task_cost_units)
        return PeriodicMeasure(p.period_slots, p.measure_cost_units, w.task_cost_units)
    if p.name == "energy_blind":
        return EnergyBlind(p.period_slots, p.spend_units)
    if p.name == "aoi_threshold":
        return AoiThreshold(p.delta_units, p.comparator_cost_units)
    return FullyAware(tx_prob_table(cap, p.tx_prob, p.tx_prob_table), p.measure_cost_units,
                      p.sample_on)


def _no_draw() -> float:
    raise RuntimeError("policy drew a random number where none is allowed")


def _ledger_abstract(st: np.ndarray, e0: int, cols: tuple[int, int, int, int, int]) -> dict:
    e, harv, deliv, spill, ovh = cols
    return {
        "stored_initial": float(e0 * st.shape[0]),
        "stored_final": float(st[:, e].sum()),
        "harvested": float(st[:, harv].sum()),
        "delivered": float(st[:, deliv].sum()),
        "leaked": 0.0,
        "spilled": float(st[:, spill].sum()),
        "acquisition_overhead": float(st[:, ovh].sum()),
    }


def _tasks_reference(start, n, energy, tasks, st, policies, cap, buf_size, cost, discard,
                     trace):
    for d, pol in enumerate(policies):
        row = st[d]
        for s in range(n):
            slot = start + s
            e_in = int(energy[d, s])
            row[K.T_HARV] += e_in
            row[K.T_E] += e_in
            if row[K.T_E] > cap:
                row[K.T_SPILL] += row[K.T_E] - cap
                row[K.T_E] = cap
            if tasks[d, s]:
                row[K.T_ARR] += 1
                if row[K.T_BUF] < buf_size:
                    row[K.T_BUF] += 1
                else:
                    row[K.T_DROP] += 1
            measured, failed = None, False
            if pol.wants_measure(slot, int(row[K.T_BUF]), bool(tasks[d, s])):
                mc = int(pol.measure_cost)
                if row[K.T_E] >= mc:
                    row[K.T_E] -= mc
                    row[K.T_DELIV] += mc
                    row[K.T_OVH] += mc
                    row[K.T_MEAS] += 1
                    measured = int(row[K.T_E])
                else:
                    row[K.T_MFAIL] += 1
                    failed = True
            dec = pol.decide(Observation(slot, int(row[K.T_BUF]), measured, failed), _no_draw)
            outcome = ""
            if dec.action == "execute":
                if row[K.T_E] >= cost:
                    row[K.T_E] -= cost
                    row[K.T_DELIV] += cost
                    row[K.T_DONE] += 1
                    row[K.T_BUF] -= 1
                    spent, outcome = cost, "completed"
                elif row[K.T_E] > 0:
                    spent = int(row[K.T_E])
                    row[K.T_DELIV] += spent
                    row[K.T_E] = 0
                    row[K.T_FATT] += 1
                    outcome = "failed"
                    if discard:
                        row[K.T_BUF] -= 1
                        row[K.T_FAILED] += 1
                else:
                    spent, outcome = 0, "unpowered"
                pol.feedback(spent)
            if trace is not None:
                trace.append({"slot": slot, "device": d, "stored": int(row[K.T_E]),
                              "buffer": int(row[K.T_BUF]), "measured": measured,
                              "action": dec.action, "outcome": outcome})


def run_tasks(cfg: ScenarioConfig, backend: str = "auto", trace: bool = False) -> Metrics:
    w = cfg.workload
    n_dev, slots = cfg.n_devices, cfg.slots
    cap = cfg.storage.capacity_units
    e0 = cfg.storage.initial_units
    use_kernel = _pick_backend(backend, trace)
    policies = [build_slot_policy(cfg) for _ in range(n_dev)]
    pol0 = policies[0]
    st = np.zeros((n_dev, K.T_COLS), dtype=np.int64)
    st[:, K.T_E] = e0
    e_streams = [EnergyStream(cfg.energy, rng_stream(cfg.seed, d, "energy")) for d in range(n_dev)]
    t_streams = [TaskStream(w.task_process, w.task_p, w.task_trace,
                            rng_stream(cfg.seed, d, "tasks")) for d in range(n_dev)]
    rows: list[dict] | None = [] if trace else None
    discard = w.on_fail == "discard"
    for start in range(0, slots, BLOCK):
        n = min(BLOCK, slots - start)
        eb = np.stack([s.block(start, n) for s in e_streams])
        tb = np.stack([s.block(start, n) for s in t_streams])
        if use_kernel:
            a, b, _ = pol0.params()
            K.tasks_block(start, n, eb, tb, st, pol0.code, a, b, cap, w.buffer_size,
                          w.task_cost_units, discard)
        else:
            _tasks_reference(start, n, eb, tb, st, policies, cap, w.buffer_size,
                             w.task_cost_units, discard, rows)
    arrivals = int(st[:, K.T_ARR].sum())
    done = int(st[:, K.T_DONE].sum())
    counters = {
        "arrivals": arrivals,
        "completed": done,
        "failed": int(st[:, K.T_FAILED].sum()),
        "failed_attempts": int(st[:, K.T_FATT].sum()),
        "dropped": int(st[:, K.T_DROP].sum()),
        "buffered": int(st[:, K.T_BUF].sum()),
        "measurements": int(st[:, K.T_MEAS].sum()),
        "measure_failures": int(st[:, K.T_MFAIL].sum()),
    }
    return Metrics(
        workload="tasks", slots=slots,
        task_completion_rate=done / arrivals if arrivals else None,
        ledger=_ledger_abstract(st, e0, (K.T_E, K.T_HARV, K.T_DELIV, K.T_SPILL, K.T_OVH)),
        counters=counters, trace=rows)


def _packets_reference(start, n, energy, events, st, policies, u_tx, u_er, erasure, cap,
                       trace):
    n_dev = st.shape[0]
    for s in range(n):
        slot = start + s
        for d in range(n_dev):
            row = st[d]
            e_in = int(energy[d, s])
            row[K.P_HARV] += e_in
            row[K.P_E] += e_in
            if row[K.P_E] > cap:
                row[K.P_SPILL] += row[K.P_E] - cap
                row[K.P_E] = cap
            if events[d, s]:
                row[K.P_EVENTS] += 1
                if row[K.P_PKT]:
                    row[K.P_REPL] += 1
                row[K.P_PKT] = 1
                row[K.P_GEN] = slot
        heard = []
        actions = {}
        for d, pol in enumerate(policies):
            row = st[d]
            if not row[K.P_PKT]:
                continue
            measured, failed = None, False
            if pol.wants_measure(slot, 1, bool(events[d, s])):
                mc = int(pol.measure_cost)
                if row[K.P_E] >= mc:
                    row[K.P_E] -= mc
                    row[K.P_DELIV] += mc
                    row[K.P_OVH] += mc
                    row[K.P_MEAS] += 1
                    measured = int(row[K.P_E])
                else:
                    row[K.P_MFAIL] += 1
                    failed = True
            flags = None
            if isinstance(pol, AoiThreshold):
                flags = (row[K.P_E] >= pol.delta,)
            obs = Observation(slot, 1, measured, failed, flags)
            dec = pol.decide(obs, lambda d=d: u_tx.draw(d))
            spend = 0
            if dec.action == "transmit":
                spend = int(dec.amount)
            elif dec.action == "execute":
                if row[K.P_E] >= dec.amount:
                    spend = int(dec.amount)
                elif row[K.P_E] > 0:
                    row[K.P_DELIV] += row[K.P_E]
                    row[K.P_E] = 0
                    row[K.P_PKT] = 0
                    row[K.P_FATT] += 1
                    actions[d] = "failed"
            if spend > 0:
                row[K.P_E] -= spend
                row[K.P_DELIV] += spend
                row[K.P_PKT] = 0
                row[K.P_TX] += 1
                row[K.P_TXGEN] = row[K.P_GEN]
                if u_er.draw(d) < erasure[spend]:
                    row[K.P_ERAS] += 1
                    actions[d] = "erased"
                else:
                    heard.append(d)
                    actions[d] = "sent"
        clear = len(heard)
        for d in range(n_dev):
            row = st[d]
            if clear == 1 and heard[0] == d:
                row[K.P_SUCC] += 1
                row[K.P_AOI] = aoi_update(int(row[K.P_AOI]), int(row[K.P_TXGEN]), True, slot)
                actions[d] = "success"
            else:
                if d in heard:
                    row[K.P_COLL] += 1
                    actions[d] = "collided"
                row[K.P_AOI] = aoi_update(int(row[K.P_AOI]), slot, False, slot)
            row[K.P_AOISUM] += row[K.P_AOI]
            if trace is not None:
                trace.append({"slot": slot, "device": d, "stored": int(row[K.P_E]),
                              "buffer": int(row[K.P_PKT]), "aoi": int(row[K.P_AOI]),
                              "outcome": actions.get(d, "")})


def run_packets(cfg: ScenarioConfig, backend: str = "auto", trace: bool = False) -> Metrics:
    w, ch = cfg.workload, cfg.channel
    n_dev, slots = cfg.n_devices, cfg.slots
    cap = cfg.storage.capacity_units
    e0 = cfg.storage.initial_units
    use_kernel = _pick_backend(backend, trace)
    erasure = erasure_table(cap, ch.erasure, ch.erasure_scale_units, ch.erasure_table)
    policies = [build_slot_policy(cfg) for _ in range(n_dev)]
    pol0 = policies[0]
    tx_prob = pol0.tx_prob if isinstance(pol0, FullyAware) else np.zeros(cap + 1)
    st = np.zeros((n_dev, K.P_COLS), dtype=np.int64)
    st[:, K.P_E] = e0
    e_streams = [EnergyStream(cfg.energy, rng_stream(cfg.seed, d, "energy")) for d in range(n_dev)]
    v_streams = [TaskStream("bernoulli", w.event_p, (), rng_stream(cfg.seed, d, "events"))
                 for d in range(n_dev)]
    u_tx = UniformBuffer([rng_stream(cfg.seed, d, "decisions") for d in range(n_dev)])
    u_er = UniformBuffer([rng_stream(cfg.seed, d, "erasure") for d in range(n_dev)])
    rows: list[dict] | None = [] if trace else None
    for start in range(0, slots, BLOCK):
        n = min(BLOCK, slots - start)
        eb = np.stack([s.block(start, n) for s in e_streams])
        vb = np.stack([s.block(start, n) for s in v_streams])
        if use_kernel:
            a, b, c = pol0.params()
            K.packets_block(start, n, eb, vb, st, u_tx.values, u_tx.cursor, u_er.values,
                            u_er.cursor, erasure, tx_prob, pol0.code, a, b, c, cap)
        else:
            _packets_reference(start, n, eb, vb, st, policies, u_tx, u_er, erasure, cap, rows)
        u_tx.refill()
        u_er.refill()
    counters = {
        "events": int(st[:, K.P_EVENTS].sum()),
        "replaced": int(st[:, K.P_REPL].sum()),
        "transmissions": int(st[:, K.P_TX].sum()),
        "successes": int(st[:, K.P_SUCC].sum()),
        "erasures": int(st[:, K.P_ERAS].sum()),
        "collisions": int(st[:, K.P_COLL].sum()),
        "failed_attempts": int(st[:, K.P_FATT].sum()),
        "buffered": int(st[:, K.P_PKT].sum()),
        "measurements": int(st[:, K.P_MEAS].sum()),
        "measure_failures": int(st[:, K.P_MFAIL].sum()),
    }
    return Metrics(
        workload="packets", slots=slots,
        avg_aoi=float(st[:, K.P_AOISUM].sum()) / (n_dev * slots),
        ledger=_ledger_abstract(st, e0, (K.P_E, K.P_HARV, K.P_DELIV, K.P_SPILL, K.P_OVH)),
        counters=counters, trace=rows)


def _pick_backend(backend: str, trace: bool) -> bool:
    if backend not in ("auto", "kernel", "reference"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "kernel":
        if trace:
            raise ValueError("per-slot traces need the reference backend")
        return True
    if backend == "reference":
        return False
    return K.HAVE_NUMBA and not trace


# ---------------------------------------------------------------------------
# Dispatch and sweeps
# ---------------------------------------------------------------------------


def run(cfg: ScenarioConfig, backend: str = "auto", trace: bool = False) -> Metrics:
    errors = validate(cfg)
    if errors:
        raise ConfigError(errors)
    kind = cfg.workload.kind
    if kind == "tasks":
        return run_tasks(cfg, backend, trace)
    if kind == "packets":
        return run_packets(cfg, backend, trace)
    from . import physical

    runners: dict[str, Callable[..., Metrics]] = {
        "nbiot": physical.run_nbiot,
        "tinyml": physical.run_tinyml,
        "rf-combining": physical.run_rf,
        "solar-forecast": physical.run_solar,
    }
    return runners[kind](cfg, trace=trace)


def parse_axis(text: str) -> tuple[str, list]:
    """``path=a..b`` (inclusive integer range), ``path=a..b:step`` or
    ``path=v1,v2,...``."""
    if "=" not in text:
        raise ConfigError([f"axis {text!r}: expected path=values"])
    path, spec = text.split("=", 1)
    path = path.strip()
    try:
        if ".." in spec:
            lo, rest = spec.split("..", 1)
            hi, step = (rest.split(":", 1) + ["1"])[:2] if ":" in rest else (rest, "1")
            lo_v, hi_v, st_v = _scalar(lo), _scalar(hi), _scalar(step)
            if all(isinstance(v, int) for v in (lo_v, hi_v, st_v)):
                values = list(range(lo_v, hi_v + 1, st_v))
            else:
                count = int(math.floor((hi_v - lo_v) / st_v + 1e-9)) + 1
                values = [lo_v + i * st_v for i in range(count)]
        else:
            values = [_scalar(v) for v in spec.split(",") if v.strip()]
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError([f"axis {text!r}: cannot parse values"]) from None
    if not values:
        raise ConfigError([f"axis {text!r}: no values"])
    return path, values


def _scalar(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def expand_sweep(cfg: ScenarioConfig, axes: dict[str, list],
                 seeds: Sequence[int]) -> list[tuple[dict, ScenarioConfig]]:
    """Cartesian product in lexicographic order (first axis outermost, seeds
    innermost).  Every point is validated before anything runs."""
    errors = [m for p in axes if (m := check_path(cfg, p))]
    if errors:
        raise ConfigError(errors)
    points = []
    problems: list[str] = []
    for combo in itertools.product(*axes.values()) if axes else [()]:
        for seed in seeds:
            c = cfg
            labels = dict(zip(axes, combo))
            try:
                for path, value in labels.items():
                    c = c.replace_path(path, value)
                c = c.replace_path("seed", int(seed))
            except ConfigError as exc:
                problems.extend(exc.violations)
                continue
            bad = validate(c)
            if bad:
                where = ", ".join(f"{k}={v}" for k, v in labels.items())
                problems.extend(f"[{where}] {m}" for m in bad)
            points.append(({**labels, "seed": int(seed)}, c))
    if problems:
        raise ConfigError(sorted(set(problems)))
    return points


def _run_point(cfg: ScenarioConfig) -> dict:
    return run(cfg).row()


def sweep(cfg: ScenarioConfig, axes: dict[str, list], seeds: Sequence[int],
          jobs: int = 1) -> list[dict]:
    points = expand_sweep(cfg, axes, seeds)
    configs = [c for _, c in points]
    if jobs > 1 and len(configs) > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(jobs) as pool:
            results = pool.map(_run_point, configs, chunksize=max(1, len(configs) // (4 * jobs)))
    else:
        results = [_run_point(c) for c in configs]
    return [{**labels, **res} for (labels, _), res in zip(points, results)]


def sweep_columns(rows: Iterable[dict], leading: Sequence[str]) -> list[str]:
    cols = list(leading) + [c for c in ("seed",) if c not in leading]
    cols += list(METRIC_COLUMNS) + list(LEDGER_COLUMNS)
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def write_csv(rows: Sequence[dict], columns: Sequence[str], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()
