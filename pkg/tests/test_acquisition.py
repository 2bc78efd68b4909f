import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zedsim.acquisition import (ComparatorSpec, CoulombCounter, CoulombSpec, IndirectSpec,
                                SamplerSpec, comparator_observe, comparator_power, coulomb_step,
                                indirect_estimate, quantize, sample_cost, sample_read,
                                sample_read_many, thermal_noise_coefficient,
                                time_to_event_estimate)
from zedsim.energy import ContractError


class TestComparator:
    def test_single_level(self):
        spec = ComparatorSpec((2.0,), 100e-9, 3.0)
        assert comparator_power(spec) == pytest.approx(300e-9)

    def test_linear_worst_case(self):
        spec = ComparatorSpec((1.0, 2.0, 3.0, 4.0), 100e-9, 3.0)
        assert comparator_power(spec) == pytest.approx(1.2e-6)

    def test_shared_ladder_table(self):
        spec = ComparatorSpec((1.0, 2.0, 3.0, 4.0), 100e-9, 3.0, g_table=((4, 2.0),))
        assert comparator_power(spec) == pytest.approx(600e-9)

    @pytest.mark.parametrize("level,flags", [(3.0, (True, False)), (1.0, (False, False)),
                                             (2.0, (True, False)), (4.0, (True, True))])
    def test_observe_closed_boundary(self, level, flags):
        spec = ComparatorSpec((2.0, 4.0), 100e-9, 3.0)
        got, cost = comparator_observe(level, spec, elapsed=10.0)
        assert got == flags
        assert cost == pytest.approx(2 * 300e-9 * 10.0)

    def test_rejects_superlinear_table(self):
        with pytest.raises(ContractError):
            ComparatorSpec((1.0, 2.0), 1e-9, 3.0, g_table=((2, 3.0),))


class TestSampleCost:
    def test_example(self):
        spec = SamplerSpec(v_r=1.0, bits=8, v_dd=3.0, t_m=10e-3, p_an=1e-6, c_s=1e-12)
        assert sample_cost(spec) == pytest.approx(1.0009e-8, rel=1e-12)

    def test_sar_capacitance_doubles_per_bit(self):
        a = SamplerSpec(1.0, 8, 3.0, 0.0, architecture="sar", unit_capacitance=1e-15)
        b = SamplerSpec(1.0, 9, 3.0, 0.0, architecture="sar", unit_capacitance=1e-15)
        assert sample_cost(b) == pytest.approx(2 * sample_cost(a))

    def test_zero_window_is_switching_only(self):
        spec = SamplerSpec(1.0, 8, 2.0, 0.0, c_s=5e-12)
        assert sample_cost(spec) == pytest.approx(5e-12 * 4.0)

    def test_zero_window_with_analog_power_rejected(self):
        with pytest.raises(ContractError):
            SamplerSpec(1.0, 8, 3.0, 0.0, p_an=1e-6)


class TestSampleRead:
    def test_noise_free_high_resolution(self, rng):
        spec = SamplerSpec(v_r=3.0, bits=24, v_dd=3.0, t_m=1e-3)
        r = sample_read(1.5, spec, 0.0, 300.0, rng)
        assert abs(r.value - 1.5) <= spec.lsb
        assert not r.saturated

    def test_quantization_variance(self, rng):
        spec = SamplerSpec(v_r=1.0, bits=8, v_dd=3.0, t_m=1e-3)
        x = rng.uniform(0.0, 1.0 - spec.lsb, 1_000_000)
        vals, analog, sat, _ = sample_read_many(x, spec, 0.0, 300.0, rng)
        assert not sat.any()
        expected = 1.0 / (3 * 2**18)
        assert expected == pytest.approx(1.2716e-6, rel=1e-4)
        assert np.var(vals - analog) == pytest.approx(expected, rel=0.02)

    def test_thermal_variance(self, rng):
        spec = SamplerSpec(v_r=1.0, bits=8, v_dd=3.0, t_m=1e-3, noise_a=1e-12)
        _, analog, _, _ = sample_read_many(np.full(1_000_000, 0.5), spec, 0.0, 300.0, rng)
        assert np.var(analog - 0.5) == pytest.approx(1e-9, rel=0.02)

    def test_offset_is_deterministic(self, rng):
        spec = SamplerSpec(v_r=3.0, bits=12, v_dd=3.0, t_m=1e-3, alpha=1e-3, beta=1e-6,
                           offset0=2e-3)
        a = sample_read(1.0, spec, 100.0, 310.0, rng)
        b = sample_read(1.0, spec, 100.0, 310.0, rng)
        assert a == b
        assert a.analog == pytest.approx(1.0 + 2e-3 + 1e-2 + 1e-4)

    @given(st.floats(-0.5, 1.5), st.integers(1, 16))
    def test_codes_on_grid(self, v, bits):
        value, sat = quantize(v, 1.0, bits)
        code = value * 2**bits
        assert code == pytest.approx(round(code), abs=1e-9)
        assert 0.0 <= value <= 1.0
        if not sat:
            assert abs(value - v) <= 0.5 / 2**bits + 1e-15

    def test_thermal_coefficient(self):
        assert thermal_noise_coefficient(300.0, 1e3) == pytest.approx(2 * 1.380649e-23 * 3e5)


class TestCoulomb:
    def test_floor_example(self):
        res, rem = coulomb_step(CoulombSpec(1e-3), 2.5e-3, 0.0, 1.0)
        assert res.count == 2
        assert res.estimate == pytest.approx(2e-3)
        assert rem == pytest.approx(0.5e-3)

    def test_cost_example(self):
        spec = CoulombSpec(1e-3, event_cost=1e-6, idle_power=1e-6)
        res, _ = coulomb_step(spec, 2.0e-3, 0.0, 10.0)
        assert res.count == 2
        assert res.cost == pytest.approx(12e-6)

    def test_remainder_carries(self):
        c = CoulombCounter(CoulombSpec(1.0))
        counts = [c.step(0.75, i, i + 1).count for i in range(5)]
        assert counts == [0, 1, 1, 1, 0]
        assert c.remainder == 0.75

    def test_error_moments(self, rng):
        q = 1e-3
        flows = rng.uniform(0.0, 20 * q, 100_000)
        counts = np.array([coulomb_step(CoulombSpec(q), f, 0.0, 1.0)[0].count for f in flows])
        err = flows - counts * q
        assert err.mean() == pytest.approx(q / 2, rel=0.02)
        assert err.var() == pytest.approx(q**2 / 12, rel=0.05)

    @given(st.lists(st.floats(0, 10), max_size=50), st.floats(0.01, 3))
    def test_estimate_never_exceeds_truth(self, flows, q):
        c = CoulombCounter(CoulombSpec(q))
        for i, f in enumerate(flows):
            c.step(f, i, i + 1)
            gap = c.true_total - c.estimate
            assert -1e-9 * max(1.0, c.true_total) <= gap < q + 1e-9 * max(1.0, c.true_total)

    def test_pre_storage_rejects_negative_flow(self):
        with pytest.raises(ContractError):
            CoulombCounter(CoulombSpec(1.0)).step(-1.0, 0.0, 1.0)

    def test_post_storage_counts_down(self):
        c = CoulombCounter(CoulombSpec(1.0, placement="post-storage"))
        c.step(3.5, 0, 1)
        assert c.step(-2.0, 1, 2).count == -2
        assert c.remainder == 0.5


class TestSoftwareEstimates:
    def test_regular_crossings(self):
        assert time_to_event_estimate([0, 5, 10, 15], 1.0) == pytest.approx(0.2)

    def test_single_crossing(self):
        assert time_to_event_estimate([3.0], 1.0) is None

    def test_noisy_intervals_use_mean(self):
        assert time_to_event_estimate([0, 4, 9, 15], 1.0) == pytest.approx(0.2)

    def test_indirect_mapping_with_bias(self):
        spec = IndirectSpec((0.0, 1000.0), (0.0, 10e-3), bias=0.1)
        p, cost = indirect_estimate(500.0, spec)
        assert p == pytest.approx(5.5e-3)
        assert cost == 0.0
