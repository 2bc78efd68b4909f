import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zedsim.config import ScenarioConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def task_cfg(**over) -> ScenarioConfig:
    """Single-device task scenario built from a flat override dict of dotted paths."""
    data = {
        "slots": 200,
        "storage": {"kind": "ideal-buffer", "capacity_units": 10},
        "energy": {"process": "poisson", "mean_units": 0.75},
        "workload": {"kind": "tasks", "task_p": 0.35, "task_cost_units": 2, "buffer_size": 1},
        "policy": {"name": "periodic_measure", "period_slots": 1},
    }
    return _apply(data, over)


def packet_cfg(**over) -> ScenarioConfig:
    data = {
        "slots": 200,
        "n_devices": 4,
        "storage": {"kind": "ideal-buffer", "capacity_units": 10},
        "energy": {"process": "bernoulli", "p": 0.3, "units": 1},
        "workload": {"kind": "packets", "event_p": 0.2},
        "policy": {"name": "aoi_fully_aware"},
    }
    return _apply(data, over)


def _apply(data: dict, over: dict) -> ScenarioConfig:
    for path, value in over.items():
        node = data
        parts = path.split("__")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value
    return ScenarioConfig.from_dict(data)


@pytest.fixture
def make_task_cfg():
    return task_cfg


@pytest.fixture
def make_packet_cfg():
    return packet_cfg


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""
    def record(n: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
