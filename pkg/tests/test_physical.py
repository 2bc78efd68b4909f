import numpy as np
import pytest

from zedsim.engine import run
from zedsim.physical import (solar_series, storage_spec, tinyml_decision_grid, tinyml_frontier)
from zedsim.presets import get_preset


def closes(m, cfg, rel=1e-9):
    spec = storage_spec(cfg)
    L = m.ledger
    lhs = L["stored_final"] - L["stored_initial"]
    rhs = (spec.eta_in * L["harvested"] - L["delivered"] / spec.eta_out - L["leaked"]
           - L["spilled"])
    scale = max(1.0, *(abs(v) for v in L.values()))
    return abs(lhs - rhs) <= rel * scale


class TestNbiot:
    @pytest.fixture
    def base(self):
        return get_preset("nbiot-gate").config(slots=7200)

    def test_gate_transitions_alternate(self, base):
        cfg = base.replace_path("source.power_W", 5e-3).replace_path("comm.interval_s", 1.0)
        m = run(cfg, trace=True)
        states = [r["on"] for r in m.trace]
        edges = [b for a, b in zip([0] + states, states) if a != b]
        assert all(x != y for x, y in zip(edges, edges[1:]))
        assert m.restart_count == sum(edges)

    def test_throughput_monotone_in_power(self, base):
        tp = [run(base.replace_path("source.power_W", p)).throughput_pph
              for p in (0.5e-3, 2e-3, 10e-3, 50e-3)]
        assert all(a <= b for a, b in zip(tp, tp[1:]))
        assert tp[-1] > 0

    def test_ledger_closes(self, base):
        for p in (1e-3, 20e-3):
            cfg = base.replace_path("source.power_W", p).replace_path("comm.mode", "bidirectional")
            assert closes(run(cfg), cfg)

    def test_voltage_never_exceeds_max(self, base):
        m = run(base.replace_path("source.power_W", 0.1), trace=True)
        assert max(r["voltage"] for r in m.trace) <= 5.0 + 1e-12

    def test_no_harvest_never_starts(self, base):
        m = run(base.replace_path("source.power_W", 0.0))
        assert m.restart_count == 0 and m.throughput_pph == 0.0


class TestTinyML:
    @pytest.fixture
    def cfg(self):
        return get_preset("tinyml-select").config(slots=60)

    def test_regions_and_monotone_frontier(self, cfg):
        currents = np.linspace(0, 1.2e-3, 13)
        volts = np.linspace(1.99, 2.02, 301)
        grid = tinyml_decision_grid(cfg, currents, volts)
        assert {-1, 0, 1} <= set(np.unique(grid))
        large = tinyml_frontier(grid, volts, 0)
        any_model = tinyml_frontier(grid, volts, 1)
        assert np.all(np.diff(large) <= 0)
        assert np.all(np.diff(any_model) <= 0)
        assert np.all(any_model <= large)

    def test_decisions_monotone_in_voltage(self, cfg):
        volts = np.linspace(1.99, 2.02, 301)
        grid = tinyml_decision_grid(cfg, [0.0, 0.5e-3], volts)
        rank = np.where(grid < 0, 99, grid)
        assert np.all(np.diff(rank, axis=1) <= 0)

    def test_current_switches_model(self, cfg):
        low = run(cfg)
        high = run(cfg.replace_path("source.current_A", 1.2e-3))
        assert high.extra["runs_LTML"] > low.extra["runs_LTML"]
        assert closes(low, cfg, rel=1e-9)

    def test_starved_device_defers(self, cfg):
        m = run(cfg.replace_path("storage.initial_V", 1.5))
        assert m.extra["defers"] == cfg.slots


class TestRf:
    @pytest.fixture
    def cfg(self):
        return get_preset("rf-combining").config(slots=300)

    def test_zero_overhead_ordering(self, cfg):
        m = run(cfg, trace=True)
        assert m.extra["argmax_match"] == 1.0
        for r in m.trace:
            assert r["genie"] >= r["dynamic"] >= max(r["static"], r["dc"]) * (1 - 1e-12)

    def test_overhead_lowers_dynamic(self, cfg):
        a = run(cfg).extra["dynamic"]
        b = run(cfg.replace_path("rf.measure_power_W", 1e-3)).extra["dynamic"]
        assert b < a

    def test_noisy_measurement_can_mispick(self, cfg):
        m = run(cfg.replace_path("policy.noise_std_W", 1e-3))
        assert m.extra["argmax_match"] < 1.0


class TestSolar:
    @pytest.fixture
    def cfg(self):
        return get_preset("solar-forecast").config()

    def test_series_split(self, cfg):
        train, test = solar_series(cfg)
        assert train.size == 3 * 2880 and test.size == cfg.slots
        assert np.all(train >= 0) and np.all(test >= 0)

    def test_forecast_beats_naive(self, cfg):
        m = run(cfg)
        assert m.extra["forecast_mse"] < m.extra["naive_mse"]

    def test_ledger_and_bounds(self, cfg):
        for name in ("forecast_wait", "fixed_interval"):
            c = cfg.replace_path("policy.name", name)
            m = run(c, trace=True)
            assert closes(m, c)
            assert all(0 <= r["stored"] <= 10.0 for r in m.trace)

    def test_forecast_wait_rarely_fails(self, cfg):
        wait = run(cfg)
        fixed = run(cfg.replace_path("policy.name", "fixed_interval"))
        assert wait.counters["failed_attempts"] < fixed.counters["failed_attempts"]

    def test_csv_trace_input(self, cfg, tmp_path):
        train, test = solar_series(cfg)
        series = np.concatenate([train, test])
        p = tmp_path / "irr.csv"
        p.write_text("timestamp_s,irradiance_Wm2\n" + "".join(
            f"{30 * i},{float(v)!r}\n" for i, v in enumerate(series)))
        from_csv = run(cfg.replace_path("forecast.irradiance_csv", str(p)))
        assert from_csv.row() == run(cfg).row()
