import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import packet_cfg, task_cfg
from zedsim.config import ConfigError
from zedsim.engine import (LEDGER_COLUMNS, METRIC_COLUMNS, BernoulliStream, UniformBuffer,
                           aoi_update, expand_sweep, parse_axis, rows_to_csv, run, sweep,
                           sweep_columns)
from zedsim.rng import rng_stream, splitmix64


def trace_tasks(energy, tasks, cap, cost, policy, **pol):
    over = {"slots": len(energy),
            "storage__capacity_units": cap,
            "energy__process": "trace", "energy__trace_units": energy,
            "workload__task_process": "trace", "workload__task_trace": tasks,
            "workload__task_cost_units": cost, "policy__name": policy}
    over.update({f"policy__{k}": v for k, v in pol.items()})
    return task_cfg(**over)


class TestAoiUpdate:
    def test_same_slot_delivery(self):
        assert aoi_update(5, 10, True, 10) == 1

    def test_no_delivery(self):
        assert aoi_update(7, 0, False, 3) == 8

    def test_three_slots_old(self):
        assert aoi_update(9, 7, True, 10) == 4

    def test_future_generation_rejected(self):
        with pytest.raises(ValueError):
            aoi_update(1, 5, True, 4)


class TestTaskExamples:
    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_full_awareness_completes_everything(self, backend):
        cfg = trace_tasks([1] * 20, [1] * 20, 3, 1, "periodic_measure")
        m = run(cfg, backend=backend)
        assert m.task_completion_rate == 1.0

    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_three_slot_blind(self, backend):
        cfg = trace_tasks([1, 1, 0], [1, 0, 0], 2, 2, "energy_blind", period_slots=1)
        m = run(cfg, backend=backend)
        assert m.counters["completed"] == 0
        assert m.counters["failed_attempts"] == 2
        assert m.ledger["delivered"] == 2

    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_three_slot_periodic(self, backend):
        cfg = trace_tasks([1, 1, 0], [1, 0, 0], 2, 2, "periodic_measure", period_slots=1)
        m = run(cfg, backend=backend)
        assert m.task_completion_rate == 1.0
        assert m.counters["failed_attempts"] == 0

    def test_three_slot_trace(self):
        cfg = trace_tasks([1, 1, 0], [1, 0, 0], 2, 2, "periodic_measure", period_slots=1)
        m = run(cfg, backend="reference", trace=True)
        assert [r["outcome"] for r in m.trace] == ["", "completed", ""]

    def test_measure_cost_equal_to_harvest_starves(self):
        cfg = trace_tasks([1] * 10, [1] * 10, 10, 2, "periodic_measure", period_slots=1,
                          measure_cost_units=1)
        m = run(cfg)
        assert m.counters["completed"] == 0
        assert m.ledger["acquisition_overhead"] == 10

    def test_two_slot_measurement_period(self):
        cfg = trace_tasks([1] * 6, [1] * 6, 10, 2, "periodic_measure", period_slots=2)
        m = run(cfg, backend="reference", trace=True)
        done = [r["slot"] for r in m.trace if r["outcome"] == "completed"]
        assert done == [1, 3, 5]

    def test_periodic_never_attempts_short(self):
        m = run(task_cfg(slots=5000))
        assert m.counters["failed_attempts"] == 0

    def test_no_arrivals_gives_no_rate(self):
        m = run(task_cfg(workload__task_p=0.0))
        assert m.task_completion_rate is None


class TestPacketExamples:
    def _cfg(self, **over):
        base = {"n_devices": 1, "slots": 50, "energy__process": "deterministic",
                "energy__units": 1, "workload__event_p": 1.0, "channel__erasure": "none"}
        base.update(over)
        return packet_cfg(**base)

    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_aoi_floor(self, backend):
        m = run(self._cfg(policy__tx_prob="always"), backend=backend)
        assert m.avg_aoi == 1.0

    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_pure_collision(self, backend):
        m = run(self._cfg(n_devices=2, policy__tx_prob="always"), backend=backend)
        assert m.counters["successes"] == 0
        assert m.counters["collisions"] == 2 * 50

    @pytest.mark.parametrize("backend", ["reference", "kernel"])
    def test_threshold_every_other_slot(self, backend):
        m = run(self._cfg(slots=6, policy__name="aoi_threshold", policy__delta_units=2),
                backend=backend)
        assert m.counters["transmissions"] == 3
        assert m.ledger["delivered"] == 6

    def test_blind_short_attempt_discards_packet(self):
        cfg = self._cfg(slots=3, policy__name="energy_blind", policy__spend_units=5,
                        workload__event_p=0.0)
        cfg = cfg.replace_path("workload.event_p", 1.0)
        m = run(cfg, backend="reference", trace=True)
        assert [r["outcome"] for r in m.trace] == ["failed"] * 3
        assert m.counters["transmissions"] == 0
        assert m.counters["failed_attempts"] == 3
        assert m.ledger["stored_final"] == 0


KIND = st.sampled_from(["tasks", "packets"])


@st.composite
def scenarios(draw):
    seed = draw(st.integers(0, 2**32))
    slots = draw(st.integers(1, 600))
    cap = draw(st.integers(1, 8))
    energy = draw(st.sampled_from([{"energy__process": "poisson", "energy__mean_units": 0.8},
                                   {"energy__process": "bernoulli", "energy__p": 0.4}]))
    if draw(KIND) == "tasks":
        cost = draw(st.integers(1, cap))
        pol = draw(st.sampled_from(["energy_blind", "periodic_measure"]))
        return task_cfg(seed=seed, slots=slots, n_devices=draw(st.integers(1, 3)),
                        storage__capacity_units=cap, workload__task_cost_units=cost,
                        workload__buffer_size=draw(st.integers(1, 4)),
                        workload__on_fail=draw(st.sampled_from(["retain", "discard"])),
                        policy__name=pol, policy__period_slots=draw(st.integers(1, 7)),
                        policy__measure_cost_units=draw(st.integers(0, 2))
                        if pol == "periodic_measure" else 0, **energy)
    pol = draw(st.sampled_from(["energy_blind", "aoi_threshold", "aoi_fully_aware"]))
    extra = {}
    if pol == "energy_blind":
        extra = {"policy__spend_units": draw(st.integers(1, cap)),
                 "policy__period_slots": draw(st.integers(1, 5))}
    elif pol == "aoi_threshold":
        extra = {"policy__delta_units": draw(st.integers(1, cap))}
    else:
        extra = {"policy__measure_cost_units": draw(st.integers(0, 1)),
                 "policy__sample_on": draw(st.sampled_from(["slot", "generation"]))}
    return packet_cfg(seed=seed, slots=slots, n_devices=draw(st.integers(1, 6)),
                      storage__capacity_units=cap, workload__event_p=draw(st.floats(0, 1)),
                      channel__erasure=draw(st.sampled_from(["exp", "linear", "none"])),
                      policy__name=pol, **extra, **energy)


class TestDualRoute:
    @given(scenarios())
    def test_kernel_matches_reference(self, cfg):
        a = run(cfg, backend="reference")
        b = run(cfg, backend="kernel")
        assert a.row() == b.row()
        assert a.counters == b.counters

    def test_block_boundary(self):
        cfg = packet_cfg(slots=9000, n_devices=5, policy__name="aoi_fully_aware")
        assert run(cfg, backend="reference").row() == run(cfg, backend="kernel").row()

    def test_trace_needs_reference(self):
        with pytest.raises(ValueError):
            run(task_cfg(), backend="kernel", trace=True)


class TestInvariants:
    @given(scenarios())
    def test_accounting_and_conservation(self, cfg):
        m = run(cfg)
        c, L = m.counters, m.ledger
        assert L["stored_final"] - L["stored_initial"] == (
            L["harvested"] - L["delivered"] - L["spilled"] - L["leaked"])
        assert L["acquisition_overhead"] <= L["delivered"]
        if m.workload == "tasks":
            assert c["completed"] + c["failed"] + c["dropped"] + c["buffered"] == c["arrivals"]
            assert c["failed"] <= c["failed_attempts"]
            if m.task_completion_rate is not None:
                assert 0.0 <= m.task_completion_rate <= 1.0
        else:
            assert c["successes"] + c["erasures"] + c["collisions"] == c["transmissions"]
            assert c["successes"] <= m.slots
            assert m.avg_aoi >= 1.0

    def test_at_most_one_success_per_slot(self):
        cfg = packet_cfg(slots=400, n_devices=6, workload__event_p=0.8,
                         channel__erasure="none", energy__p=0.9)
        m = run(cfg, backend="reference", trace=True)
        per_slot = {}
        for r in m.trace:
            per_slot[r["slot"]] = per_slot.get(r["slot"], 0) + (r["outcome"] == "success")
        assert max(per_slot.values()) <= 1
        for slot in per_slot:
            outs = [r["outcome"] for r in m.trace if r["slot"] == slot]
            if "success" in outs:
                assert outs.count("sent") + outs.count("collided") == 0

    def test_deterministic(self):
        cfg = packet_cfg(slots=3000, n_devices=8)
        assert run(cfg).row() == run(cfg).row()


class Branch(Exception):
    pass


class Enumerator:
    """Exhaustive expectation over every Bernoulli draw a simulator makes."""

    def __init__(self, sim):
        self.sim = sim

    def expect(self):
        total = 0.0
        stack = [[]]
        while stack:
            script = stack.pop()
            self.script, self.idx, self.weight = script, 0, 1.0
            try:
                value = self.sim(self.bern)
            except Branch:
                stack.append(script + [False])
                stack.append(script + [True])
                continue
            total += self.weight * value
        return total

    def bern(self, q):
        if q <= 0.0:
            return False
        if q >= 1.0:
            return True
        if self.idx == len(self.script):
            raise Branch
        b = self.script[self.idx]
        self.idx += 1
        self.weight *= q if b else 1.0 - q
        return b


def oracle_tasks(policy, slots, pe, pt, cap, cost, param):
    def sim(bern):
        e = buf = est = done = 0
        for s in range(slots):
            e = min(cap, e + bern(pe))
            if bern(pt) and buf < 1:
                buf = 1
            due = (s + 1) % param == 0
            go = False
            if policy == "energy_blind":
                go = buf and due
            else:
                if due:
                    est = e
                go = buf and est >= cost
            if go:
                if e >= cost:
                    e -= cost
                    done += 1
                    buf = 0
                    spent = cost
                else:
                    spent, e = e, 0
                est = max(est - spent, 0)
        return done
    return Enumerator(sim).expect()


def oracle_threshold_aoi(n_dev, slots, pe, pv, cap, delta):
    def sim(bern):
        e = [0] * n_dev
        pkt = [0] * n_dev
        gen = [0] * n_dev
        aoi = [0] * n_dev
        total = 0
        for s in range(slots):
            for d in range(n_dev):
                e[d] = min(cap, e[d] + bern(pe))
                if bern(pv):
                    pkt[d], gen[d] = 1, s
            clear = []
            for d in range(n_dev):
                if pkt[d] and e[d] >= delta:
                    e[d] -= delta
                    pkt[d] = 0
                    if not bern(1.0 - delta / cap):
                        clear.append(d)
            for d in range(n_dev):
                aoi[d] = s - gen[d] + 1 if clear == [d] else aoi[d] + 1
                total += aoi[d]
        return total
    return Enumerator(sim).expect()


class TestBruteForceOracle:
    RUNS = 3000

    def _mc(self, make, metric):
        vals = np.array([metric(run(make(seed), backend="kernel")) for seed in range(self.RUNS)])
        return vals.mean(), vals.std(ddof=1) / math.sqrt(self.RUNS)

    @pytest.mark.parametrize("policy,param", [("energy_blind", 1), ("energy_blind", 2),
                                              ("periodic_measure", 1), ("periodic_measure", 2)])
    def test_task_completions(self, policy, param):
        exact = oracle_tasks(policy, 4, 0.6, 0.5, 3, 2, param)

        def make(seed):
            return task_cfg(seed=seed, slots=4, storage__capacity_units=3,
                            energy__process="bernoulli", energy__p=0.6, energy__units=1,
                            workload__task_p=0.5, policy__name=policy,
                            policy__period_slots=param)
        mean, se = self._mc(make, lambda m: m.counters["completed"])
        assert abs(mean - exact) <= 3 * se

    def test_threshold_aoi(self):
        exact = oracle_threshold_aoi(2, 3, 0.7, 0.5, 2, 1)

        def make(seed):
            return packet_cfg(seed=seed, slots=3, n_devices=2, storage__capacity_units=2,
                              energy__p=0.7, workload__event_p=0.5, channel__erasure="linear",
                              policy__name="aoi_threshold", policy__delta_units=1)
        mean, se = self._mc(make, lambda m: m.avg_aoi * 2 * 3)
        assert abs(mean - exact) <= 3 * se


class TestStreams:
    def test_repeatable(self):
        a = rng_stream(7, 3, "energy").random(1000)
        b = rng_stream(7, 3, "energy").random(1000)
        np.testing.assert_array_equal(a, b)

    def test_devices_differ(self):
        a = rng_stream(7, 0, "energy").random(1000)
        b = rng_stream(7, 1, "energy").random(1000)
        assert not np.array_equal(a, b)

    def test_labels_differ(self):
        assert rng_stream(7, 0, "energy").random() != rng_stream(7, 0, "tasks").random()

    def test_splitmix_reference_value(self):
        # first output of the SplitMix64 generator seeded with 0
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_bernoulli_mean(self):
        s = BernoulliStream(rng_stream(1, 0, "tasks"), 0.35)
        x = np.concatenate([s.block(i, 4096) for i in range(0, 1_000_000, 4096)])
        assert abs(x[:1_000_000].mean() - 0.35) <= 0.002

    def test_bernoulli_blocks_are_a_single_stream(self):
        a = BernoulliStream(rng_stream(1, 0, "x"), 0.1)
        b = BernoulliStream(rng_stream(1, 0, "x"), 0.1)
        whole = a.block(0, 1000)
        parts = np.concatenate([b.block(0, 300), b.block(300, 700)])
        np.testing.assert_array_equal(whole, parts)

    def test_uniform_buffer_preserves_order(self):
        buf = UniformBuffer([rng_stream(2, 0, "u")], cap=8)
        first = [buf.draw(0) for _ in range(3)]
        buf.refill()
        rest = [buf.draw(0) for _ in range(8)]
        ref = rng_stream(2, 0, "u").random(11)
        np.testing.assert_array_equal(first + rest, ref)


class TestSweep:
    def test_single_axis(self):
        rows = sweep(task_cfg(slots=50), {"policy.period_slots": list(range(1, 11))}, [0])
        assert len(rows) == 10
        assert [r["policy.period_slots"] for r in rows] == list(range(1, 11))

    def test_empty_axes(self):
        assert len(sweep(task_cfg(slots=50), {}, [0])) == 1

    def test_grid_order(self):
        axes = {"workload.buffer_size": [1, 5], "policy.period_slots": [1, 2, 3]}
        pts = expand_sweep(task_cfg(), axes, [0, 1])
        keys = [(p["workload.buffer_size"], p["policy.period_slots"], p["seed"]) for p, _ in pts]
        assert len(keys) == 2 * 3 * 2
        assert keys == sorted(keys)

    def test_bad_path_rejected_before_running(self, monkeypatch):
        import zedsim.engine as eng
        monkeypatch.setattr(eng, "run", lambda *a, **k: pytest.fail("ran"))
        with pytest.raises(ConfigError):
            sweep(task_cfg(), {"policy.periodd": [1]}, [0])

    def test_bad_value_rejected_before_running(self, monkeypatch):
        import zedsim.engine as eng
        monkeypatch.setattr(eng, "run", lambda *a, **k: pytest.fail("ran"))
        with pytest.raises(ConfigError):
            sweep(task_cfg(), {"workload.task_p": [0.5, 1.2]}, [0])

    def test_parallel_matches_serial(self):
        cfg = task_cfg(slots=300)
        axes = {"policy.period_slots": [1, 2, 3]}
        assert sweep(cfg, axes, [0, 1], jobs=2) == sweep(cfg, axes, [0, 1], jobs=1)

    @pytest.mark.parametrize("text,path,values", [
        ("policy.period_slots=1..5", "policy.period_slots", [1, 2, 3, 4, 5]),
        ("policy.period_slots=1..9:4", "policy.period_slots", [1, 5, 9]),
        ("workload.buffer_size=1,5", "workload.buffer_size", [1, 5]),
        ("energy.p=0.1..0.3:0.1", "energy.p", [0.1, 0.2, 0.30000000000000004]),
        ("policy.name=energy_blind", "policy.name", ["energy_blind"]),
    ])
    def test_parse_axis(self, text, path, values):
        assert parse_axis(text) == (path, values)

    def test_parse_axis_errors(self):
        for bad in ("nonsense", "a=", "a=1..x"):
            with pytest.raises(ConfigError):
                parse_axis(bad)

    def test_csv_columns(self):
        rows = sweep(task_cfg(slots=50), {"policy.period_slots": [1, 2]}, [0])
        cols = sweep_columns(rows, ["policy.period_slots"])
        assert cols == ["policy.period_slots", "seed", *METRIC_COLUMNS, *LEDGER_COLUMNS]
        text = rows_to_csv(rows, cols)
        lines = text.splitlines()
        assert lines[0] == ",".join(cols)
        assert len(lines) == 3
        assert text.count(lines[0]) == 1


def test_vanishing_probability_stream_terminates():
    s = BernoulliStream(rng_stream(0, 0, "events"), 1e-300)
    assert s.block(0, 4096).sum() == 0
    assert s.block(4096, 4096).sum() == 0
