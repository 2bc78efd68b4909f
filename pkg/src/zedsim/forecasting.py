"""AR(I) irradiance forecasting, irradiance-to-energy conversion and the
wait-until-feasible rule."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .energy import ContractError


class FitError(ContractError):
    pass


class ColdModelError(ContractError):
    pass


class InfeasibleWithinHorizon(Exception):
    """Forecast horizon ends before the requested energy is reached."""

    def __init__(self, energy: float, reached: float, horizon: int):
        super().__init__(f"only {reached:.4g} of {energy:.4g} J reachable in {horizon} slots")
        self.energy = energy
        self.reached = reached
        self.horizon = horizon


@dataclass
class ArimaModel:
    """ARIMA(p, d, 0) with coefficients on the d-times differenced series."""

    p: int
    d: int
    phi: np.ndarray
    q: int = 0
    history: list[float] = field(default_factory=list)
    clamp_nonnegative: bool = True

    def __post_init__(self) -> None:
        if self.d not in (0, 1):
            raise ContractError("differencing order must be 0 or 1")
        if self.q != 0:
            raise ContractError("moving-average terms are not supported")
        self.phi = np.asarray(self.phi, dtype=float)
        if self.phi.shape != (self.p,):
            raise ContractError("need exactly p AR coefficients")
        self.history = [float(x) for x in self.history][-self._keep:]

    @property
    def _keep(self) -> int:
        return max(self.p + self.d, 1)

    @property
    def warm(self) -> bool:
        return len(self.history) >= self.p + self.d

    def update(self, value: float) -> None:
        self.history.append(float(value))
        del self.history[:-self._keep]

    def coefficients(self) -> list[float]:
        return [float(x) for x in self.phi]


def _lag_matrix(z: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    n = z.size - p
    x = np.column_stack([z[p - i - 1: p - i - 1 + n] for i in range(p)]) if p else np.empty((n, 0))
    return x, z[p:]


def arima_fit(series: Sequence[float], p: int, d: int = 1) -> ArimaModel:
    """Least-squares fit of the AR coefficients (no intercept)."""
    y = np.asarray(series, dtype=float)
    if p < 0 or d not in (0, 1):
        raise ContractError("need p >= 0 and d in {0, 1}")
    if y.size < 2 * p + d or y.size <= d:
        raise FitError(f"series of length {y.size} too short for ARIMA({p},{d},0)")
    z = np.diff(y) if d else y
    if p == 0:
        return ArimaModel(0, d, np.zeros(0), history=list(y[-1:]))
    x, target = _lag_matrix(z, p)
    if not np.any(x):
        phi = np.zeros(p)
    else:
        phi, _, rank, _ = np.linalg.lstsq(x, target, rcond=None)
        if rank < p:
            raise FitError("rank-deficient AR regression")
    return ArimaModel(p, d, phi, history=list(y[-(p + d):]))


def arima_forecast(model: ArimaModel, horizon: int) -> np.ndarray:
    """Recursive multi-step forecast; negative values are floored at 0 when
    ``clamp_nonnegative`` is set (irradiance is non-negative)."""
    if not model.warm:
        raise ColdModelError("model history shorter than p + d")
    h = np.asarray(model.history, dtype=float)
    level = h[-1] if h.size else 0.0
    z = list(np.diff(h) if model.d else h)
    out = np.empty(horizon)
    for i in range(horizon):
        nxt = sum(model.phi[j] * z[-1 - j] for j in range(model.p)) if model.p else 0.0
        z.append(nxt)
        level = level + nxt if model.d else nxt
        out[i] = level
    if model.clamp_nonnegative:
        np.maximum(out, 0.0, out=out)
    return out


def one_step_predictions(model: ArimaModel, series: Sequence[float]) -> np.ndarray:
    """In-sample/out-of-sample one-step-ahead predictions for ``series``.

    Element i predicts series[i] from series[:i]; the first p + d entries
    are NaN.
    """
    y = np.asarray(series, dtype=float)
    k = model.p + model.d
    pred = np.full(y.size, np.nan)
    if y.size <= k:
        return pred
    z = np.diff(y) if model.d else y
    if model.p:
        x, _ = _lag_matrix(z, model.p)
        zhat = x @ model.phi
    else:
        zhat = np.zeros(z.size)
    if model.d:
        pred[k:] = y[k - 1:-1] + zhat
    else:
        pred[k:] = zhat
    if model.clamp_nonnegative:
        pred[k:] = np.maximum(pred[k:], 0.0)
    return pred


@dataclass(frozen=True)
class PanelSpec:
    area: float  # m^2
    xi_pv: float
    xi_pmu: float
    slot: float  # s

    def __post_init__(self) -> None:
        if not (self.area > 0 and self.slot > 0 and 0 < self.xi_pv <= 1 and 0 < self.xi_pmu <= 1):
            raise ContractError("panel needs positive area/slot and efficiencies in (0, 1]")


# 81 x 137 mm cell, 17 % module and 85 % power-management efficiency, 30 s slots
DEFAULT_PANEL = PanelSpec(area=0.081 * 0.137, xi_pv=0.17, xi_pmu=0.85, slot=30.0)


def irradiance_to_energy(i0: float, i1: float, panel: PanelSpec = DEFAULT_PANEL) -> float:
    if i0 < 0 or i1 < 0:
        raise ContractError("irradiance must be >= 0")
    return 0.5 * (i0 + i1) * panel.slot * panel.area * panel.xi_pv * panel.xi_pmu


def forecast_energies(last_observed: float, forecast: Sequence[float],
                      panel: PanelSpec = DEFAULT_PANEL) -> np.ndarray:
    """Per-slot energies from a forecast path; slot n spans [Î(n-1), Î(n)]."""
    path = np.concatenate([[max(last_observed, 0.0)], np.maximum(forecast, 0.0)])
    return 0.5 * (path[:-1] + path[1:]) * panel.slot * panel.area * panel.xi_pv * panel.xi_pmu


def waiting_slots(energy: float, forecast_energies: Sequence[float]) -> int:
    """Smallest N with sum of the first N forecast energies >= ``energy``."""
    if energy < 0:
        raise ContractError("task energy must be >= 0")
    if energy == 0:
        return 0
    acc = 0.0
    for n, e in enumerate(forecast_energies, start=1):
        acc += e
        if acc >= energy:
            return n
    raise InfeasibleWithinHorizon(energy, acc, len(forecast_energies))


def load_irradiance_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV (timestamp_s, irradiance_Wm2), header optional."""
    ts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                continue
            ts.append(t)
            vals.append(v)
    return np.asarray(ts), np.asarray(vals)


def synthetic_irradiance(n_slots: int, rng: np.random.Generator, *, slot: float = 30.0,
                         peak: float = 900.0, day_s: float = 86400.0,
                         ar: Sequence[float] = (0.6, 0.2), noise: float = 0.05,
                         start_s: float = 0.0) -> np.ndarray:
    """Clear-sky half-sine daylight profile modulated by a stationary AR cloud
    factor.  Values are W/m^2."""
    t = start_s + slot * np.arange(n_slots)
    phase = (t % day_s) / day_s
    clear = peak * np.clip(np.sin(np.pi * (phase - 0.25) / 0.5), 0.0, None)
    clear[(phase < 0.25) | (phase > 0.75)] = 0.0
    ar = np.asarray(ar, dtype=float)
    cloud = np.zeros(n_slots)
    eps = rng.normal(0.0, noise, n_slots)
    for i in range(n_slots):
        acc = eps[i]
        for j, a in enumerate(ar):
            if i - 1 - j >= 0:
                acc += a * cloud[i - 1 - j]
        cloud[i] = acc
    return np.clip(clear * (1.0 + cloud), 0.0, None)


def ar_series(n: int, phi: Sequence[float], rng: np.random.Generator, *,
              sigma: float = 1.0, d: int = 0, burn: int = 200, level: float = 0.0) -> np.ndarray:
    """Generic AR(p) (or ARI(p,1) when d = 1) synthetic series."""
    phi = np.asarray(phi, dtype=float)
    p = phi.size
    total = n + burn
    z = np.zeros(total)
    eps = rng.normal(0.0, sigma, total)
    for i in range(total):
        acc = eps[i]
        for j in range(p):
            if i - 1 - j >= 0:
                acc += phi[j] * z[i - 1 - j]
        z[i] = acc
    z = z[burn:]
    return level + (np.cumsum(z) if d else z)
