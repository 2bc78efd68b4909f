import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zedsim.energy import ContractError
from zedsim.forecasting import (DEFAULT_PANEL, ArimaModel, ColdModelError, FitError,
                                InfeasibleWithinHorizon, PanelSpec, arima_fit, arima_forecast,
                                forecast_energies, irradiance_to_energy, load_irradiance_csv,
                                one_step_predictions, waiting_slots)


def ari_series(rng, n, phi, sigma=1.0):
    """ARI(p,1) path built from an explicit recursion on the increments."""
    p = len(phi)
    z = np.zeros(n + 100)
    e = rng.normal(0.0, sigma, z.size)
    for t in range(z.size):
        z[t] = e[t] + sum(phi[j] * z[t - 1 - j] for j in range(p) if t - 1 - j >= 0)
    return 50.0 + np.cumsum(z[100:])


def brute_wait(energy, forecasts):
    for n in range(len(forecasts) + 1):
        if sum(forecasts[:n]) >= energy:
            return n
    return None


class TestFit:
    def test_recovers_noiseless_ar1(self):
        x = 100.0 * 0.5 ** np.arange(30)
        m = arima_fit(x, 1, 0)
        # closed-form single-regressor least squares
        oracle = np.dot(x[1:], x[:-1]) / np.dot(x[:-1], x[:-1])
        assert oracle == pytest.approx(0.5, abs=1e-12)
        assert m.phi[0] == pytest.approx(0.5, abs=1e-6)

    def test_constant_series_differences_to_zero(self):
        m = arima_fit(np.full(40, 7.0), 5, 1)
        assert np.all(m.phi == 0.0)

    def test_too_short(self):
        with pytest.raises(FitError):
            arima_fit([1.0, 2.0, 3.0], 5, 1)

    def test_rejects_ma_terms(self):
        with pytest.raises(ContractError):
            ArimaModel(1, 1, [0.1], q=1)

    def test_coefficients_round_trip(self, rng):
        y = ari_series(rng, 500, [0.4, 0.2])
        m = arima_fit(y, 2, 1)
        again = ArimaModel(2, 1, m.coefficients(), history=list(y))
        np.testing.assert_array_equal(arima_forecast(m, 5), arima_forecast(again, 5))


class TestForecast:
    def test_random_walk(self):
        m = ArimaModel(1, 1, [0.0], history=[380.0, 400.0])
        np.testing.assert_array_equal(arima_forecast(m, 4), [400.0] * 4)

    def test_ar1_recursion(self):
        m = ArimaModel(1, 0, [0.5], history=[100.0])
        np.testing.assert_allclose(arima_forecast(m, 3), [50.0, 25.0, 12.5])

    def test_negative_forecasts_floored(self):
        m = ArimaModel(1, 1, [1.0], history=[100.0, 40.0])
        out = arima_forecast(m, 3)
        assert np.all(out >= 0.0)
        assert out[-1] == 0.0

    def test_cold_model(self):
        with pytest.raises(ColdModelError):
            arima_forecast(ArimaModel(5, 1, np.zeros(5), history=[1.0, 2.0]), 1)

    def test_one_step_beats_last_value_on_ari_data(self):
        wins = 0
        for seed in range(100):
            y = ari_series(np.random.default_rng(seed), 600, [0.5, -0.2, 0.1])
            m = arima_fit(y, 3, 1)
            m.clamp_nonnegative = False  # the synthetic level may go negative
            pred = one_step_predictions(m, y)
            k = 4
            fit_var = np.mean((y[k:] - pred[k:]) ** 2)
            naive_var = np.mean((y[k:] - y[k - 1:-1]) ** 2)
            wins += fit_var <= naive_var
        assert wins == 100


class TestIrradianceToEnergy:
    def test_zero(self):
        assert irradiance_to_energy(0.0, 0.0) == 0.0

    def test_reference_case(self):
        # 500 W/m^2 * 30 s * (0.081 * 0.137) m^2 * 0.17 * 0.85
        assert irradiance_to_energy(500.0, 500.0) == pytest.approx(24.0527475, rel=1e-9)

    def test_trapezoid_halves(self):
        assert irradiance_to_energy(0.0, 500.0) == pytest.approx(
            0.5 * irradiance_to_energy(500.0, 500.0), rel=1e-12)

    @given(st.floats(0, 1500), st.floats(0, 1500), st.floats(0.1, 10))
    def test_linear(self, a, b, k):
        assert irradiance_to_energy(k * a, k * b) == pytest.approx(
            k * irradiance_to_energy(a, b), rel=1e-12, abs=1e-12)
        big = PanelSpec(2 * DEFAULT_PANEL.area, 0.17, 0.85, 30.0)
        assert irradiance_to_energy(a, b, big) == pytest.approx(
            2 * irradiance_to_energy(a, b), rel=1e-12, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ContractError):
            irradiance_to_energy(-1.0, 0.0)

    def test_forecast_energies_chain_from_last_observation(self):
        e = forecast_energies(100.0, [200.0, 300.0])
        assert e[0] == pytest.approx(irradiance_to_energy(100.0, 200.0))
        assert e[1] == pytest.approx(irradiance_to_energy(200.0, 300.0))


class TestWaitingSlots:
    def test_zero_energy(self):
        assert waiting_slots(0.0, []) == 0

    def test_example(self):
        assert waiting_slots(2.5, [1.0, 1.0, 1.0]) == 3

    def test_infeasible(self):
        with pytest.raises(InfeasibleWithinHorizon):
            waiting_slots(1.0, [0.0, 0.0, 0.0])

    @given(st.lists(st.floats(0, 5), max_size=30), st.floats(0, 50))
    def test_matches_prefix_sum_brute_force(self, fc, e):
        want = brute_wait(e, fc)
        if want is None:
            with pytest.raises(InfeasibleWithinHorizon):
                waiting_slots(e, fc)
        else:
            assert waiting_slots(e, fc) == want

    @given(st.lists(st.floats(0.01, 5), min_size=1, max_size=30), st.floats(0, 10),
           st.floats(0, 10), st.floats(0, 2))
    def test_monotone(self, fc, e1, e2, boost):
        lo, hi = sorted((e1, e2))
        total = sum(fc)
        if hi > total:
            return
        assert waiting_slots(lo, fc) <= waiting_slots(hi, fc)
        assert waiting_slots(hi, [f + boost for f in fc]) <= waiting_slots(hi, fc)


def test_csv_loader_skips_header(tmp_path):
    p = tmp_path / "irr.csv"
    p.write_text("timestamp_s,irradiance_Wm2\n0,10.5\n30,12.0\n")
    t, v = load_irradiance_csv(p)
    np.testing.assert_array_equal(t, [0.0, 30.0])
    np.testing.assert_array_equal(v, [10.5, 12.0])
