"""Runners for the physical-regime workloads.

Each runner maps a validated :class:`ScenarioConfig` to :class:`Metrics`,
with ``cfg.slots`` steps of the workload's natural time unit: ``comm.dt_s``
seconds (nbiot), one inference period (tinyml), one random scene
(rf-combining) or one forecast slot (solar-forecast).
"""

from __future__ import annotations

import numpy as np

from .config import ScenarioConfig
from .energy import (ConstantCurrentSource, CurrentLoad, EnergyState, ResistiveLoad,
                     StorageSpec, integrate_circuit, leak_energy, step_energy)
from .engine import Metrics
from .forecasting import (InfeasibleWithinHorizon, PanelSpec, arima_fit, arima_forecast,
                          forecast_energies, irradiance_to_energy, load_irradiance_csv,
                          one_step_predictions, synthetic_irradiance, waiting_slots)
from .policies import DualThresholdGate, TinyModel, tinyml_select
from .rf import RfScene, dft_codebook, random_scene, rf_benchmarks, rf_dc_power, rf_explore_exploit
from .rng import rng_stream

SLOTS_PER_DAY = 86400


def storage_spec(cfg: ScenarioConfig) -> StorageSpec:
    """Physical storage description from the config section."""
    s = cfg.storage
    kw = {}
    if s.preset is not None:
        from .energy import STORAGE_PRESETS

        pre = STORAGE_PRESETS[s.preset]
        kw = {"eta_in": pre.eta_in, "eta_out": pre.eta_out,
              "leak_fraction_per_hour": pre.leak_fraction_per_hour}
    for name in ("eta_in", "eta_out", "leak_fraction_per_hour"):
        if getattr(s, name) is not None:
            kw[name] = getattr(s, name)
    kw["leak_power"] = s.leak_power_W
    if s.kind == "capacitor":
        return StorageSpec.capacitor(s.capacitance_F, s.v_max_V, s.v_cutoff_V, **kw)
    return StorageSpec(capacity=s.capacity_J, **kw)


def initial_state(cfg: ScenarioConfig, spec: StorageSpec, default_v: float = 0.0) -> EnergyState:
    s = cfg.storage
    if spec.kind == "capacitor":
        v = s.initial_V if s.initial_V is not None else default_v
        if s.initial_J is not None:
            v = spec.voltage_at(s.initial_J)
        return EnergyState.at_voltage(spec, min(v, spec.v_max))
    return EnergyState.empty(spec, min(s.initial_J or 0.0, spec.capacity))


def _ledger(state: EnergyState) -> dict[str, float]:
    return {
        "stored_initial": state.initial,
        "stored_final": state.stored,
        "harvested": state.harvested,
        "delivered": state.delivered,
        "leaked": state.leaked,
        "spilled": state.spilled,
        "acquisition_overhead": state.acquisition_overhead,
    }


# ---------------------------------------------------------------------------
# Batteryless NB-IoT behind a dual-threshold gate
# ---------------------------------------------------------------------------


def run_nbiot(cfg: ScenarioConfig, trace: bool = False) -> Metrics:
    """Constant-power harvester charging a capacitor; the radio is powered
    through a hysteresis gate.

    While ON the device draws PSM power and runs one transaction every
    ``interval_s`` (the first immediately after power-up, after paying the
    rejoin energy).  A draw that would pull the capacitor below ``v_off_V``
    browns the device out: the available energy is drained, the packet is
    lost and the gate opens.
    """
    c, p = cfg.comm, cfg.policy
    spec = storage_spec(cfg)
    state = initial_state(cfg, spec, default_v=p.v_off_V)
    gate = DualThresholdGate(p.v_on_V, p.v_off_V)
    dt = c.dt_s
    harvest = cfg.source.power_W * c.pmu_efficiency * dt
    tx_energy = c.uplink_energy_J + (c.downlink_energy_J if c.mode == "bidirectional" else 0.0)
    interval = max(1, int(round(c.interval_s / dt)))
    e_off = spec.energy_at(p.v_off_V)
    next_tx = 0
    sent = brownouts = attempts = 0
    rows: list[dict] | None = [] if trace else None
    for step in range(cfg.slots):
        event = gate.update(state.voltage, step)
        load = 0.0
        tx = False
        if gate.on:
            load = c.psm_power_W * dt
            if event == "on":
                load += c.rejoin_energy_J
                next_tx = step
            if step >= next_tx:
                tx = True
                attempts += 1
                load += tx_energy
                next_tx = step + interval
        outcome = ""
        if load > 0:
            budget = (state.stored + spec.eta_in * harvest - leak_energy(state.stored, spec, dt)
                      - e_off)
            if load / spec.eta_out > budget:
                drawn = max(budget, 0.0) * spec.eta_out
                state = step_energy(state, spec, harvest, drawn, dt).state
                gate.force_off(step)
                brownouts += 1
                outcome = "brownout"
            else:
                state = step_energy(state, spec, harvest, load, dt).state
                if tx:
                    sent += 1
                    outcome = "sent"
        else:
            state = step_energy(state, spec, harvest, 0.0, dt).state
        if rows is not None:
            rows.append({"slot": step, "voltage": state.voltage, "on": int(gate.on),
                         "outcome": outcome})
    hours = cfg.slots * dt / 3600.0
    return Metrics(
        workload="nbiot", slots=cfg.slots,
        net_harvested_power_W=(state.harvested - state.acquisition_overhead) / (cfg.slots * dt),
        throughput_pph=sent / hours,
        restart_count=gate.restarts,
        ledger=_ledger(state),
        counters={"packets_sent": sent, "attempts": attempts, "brownouts": brownouts,
                  "restarts": gate.restarts},
        trace=rows)


# ---------------------------------------------------------------------------
# TinyML model selection
# ---------------------------------------------------------------------------


def tiny_models(cfg: ScenarioConfig) -> list[TinyModel]:
    v = cfg.tinyml.v_nominal_V
    return [TinyModel.from_energy(m.id, m.accuracy_rank, m.energy_J, m.duration_s, v)
            for m in cfg.models]


def run_tinyml(cfg: ScenarioConfig, trace: bool = False, substeps: int = 100) -> Metrics:
    """One inference opportunity per period: pick the most accurate model
    whose predicted post-inference voltage stays above ``v_min_V``, run it,
    then idle for the rest of the period, all while the constant-current
    harvester charges the capacitor."""
    t = cfg.tinyml
    spec = storage_spec(cfg)
    state = initial_state(cfg, spec, default_v=cfg.policy.v_min_V)
    models = tiny_models(cfg)
    policy = tinyml_select(models, cfg.policy.v_min_V, spec.capacitance)
    source = ConstantCurrentSource(cfg.source.current_A)
    idle = CurrentLoad(t.idle_current_A) if t.idle_current_A > 0 else None
    by_id = {m.id: m for m in policy.models}
    counts = {m.id: 0 for m in policy.models}
    defers = 0
    rows: list[dict] | None = [] if trace else None
    for k in range(cfg.slots):
        t0 = k * t.inference_period_s
        dec = policy.decide(state.voltage, source.current)
        busy = 0.0
        if dec.action == "select_model":
            m = by_id[dec.arg]
            counts[m.id] += 1
            busy = min(m.duration, t.inference_period_s)
            state = integrate_circuit(state, source, ResistiveLoad(m.r_load), spec, busy,
                                      substeps, t0)
        else:
            defers += 1
        rest = t.inference_period_s - busy
        if rest > 0:
            state = integrate_circuit(state, source, idle, spec, rest, substeps, t0 + busy)
        if rows is not None:
            rows.append({"slot": k, "voltage": state.voltage, "action": dec.action,
                         "model": dec.arg or ""})
    extra = {f"runs_{mid}": n for mid, n in counts.items()}
    extra["defers"] = defers
    duration = cfg.slots * t.inference_period_s
    return Metrics(
        workload="tinyml", slots=cfg.slots,
        task_completion_rate=(cfg.slots - defers) / cfg.slots,
        net_harvested_power_W=(state.harvested - state.acquisition_overhead) / duration,
        ledger=_ledger(state), counters={"inferences": cfg.slots - defers, "defers": defers},
        extra=extra, trace=rows)


def tinyml_decision_grid(cfg: ScenarioConfig, currents, voltages) -> np.ndarray:
    """Decision map over (current, voltage): entry [i, j] is the index of
    the chosen model (0 = most accurate) or -1 for defer."""
    models = tiny_models(cfg)
    policy = tinyml_select(models, cfg.policy.v_min_V, cfg.storage.capacitance_F)
    index = {m.id: i for i, m in enumerate(policy.models)}
    out = np.empty((len(currents), len(voltages)), dtype=np.int64)
    for i, cur in enumerate(currents):
        for j, v in enumerate(voltages):
            dec = policy.decide(float(v), float(cur))
            out[i, j] = index[dec.arg] if dec.action == "select_model" else -1
    return out


def tinyml_frontier(grid: np.ndarray, voltages, model: int = 0) -> np.ndarray:
    """Lowest grid voltage at which ``model`` (or a more accurate one) is
    chosen, per current row; NaN where it never is."""
    v = np.asarray(voltages, dtype=float)
    out = np.full(grid.shape[0], np.nan)
    for i, row in enumerate(grid):
        ok = np.nonzero((row >= 0) & (row <= model))[0]
        if ok.size:
            out[i] = v[ok[0]]
    return out


# ---------------------------------------------------------------------------
# Dynamic RF combining
# ---------------------------------------------------------------------------


def rf_base_scene(cfg: ScenarioConfig) -> RfScene:
    r = cfg.rf
    return RfScene(
        antennas=r.antennas, tx_power=r.tx_power_W, path_loss_exponent=r.path_loss_exponent,
        reference_loss_db=r.reference_loss_dB, eh_efficiency=r.eh_efficiency,
        spacing=r.spacing_wavelengths, p_tune=r.tune_power_W, p_measure=r.measure_power_W,
        t_tune=r.tune_time_s, t_measure=r.measure_time_s, probe_duration=r.probe_duration_s,
        window=r.window_s)


def run_rf(cfg: ScenarioConfig, trace: bool = False) -> Metrics:
    """Average the four combining strategies over ``slots`` random source
    positions; the dynamic strategy measures with optional Gaussian noise."""
    base = rf_base_scene(cfg)
    pos_rng = rng_stream(cfg.seed, 0, "scenes")
    noise_rng = rng_stream(cfg.seed, 0, "noise")
    noise = cfg.policy.noise_std_W
    sums = {"dc": 0.0, "static": 0.0, "dynamic": 0.0, "genie": 0.0}
    matches = 0
    book = dft_codebook(base.antennas)
    rows: list[dict] | None = [] if trace else None
    for k in range(cfg.slots):
        scene = random_scene(pos_rng, base, cfg.rf.disk_radius_m)
        bench = rf_benchmarks(scene)
        res = rf_explore_exploit(scene, noise_rng, noise)
        bench["dynamic"] = res.net_power
        for key in sums:
            sums[key] += bench[key]
        truth = int(np.argmax(np.atleast_1d(rf_dc_power(scene, book))))
        matches += res.index == truth
        if rows is not None:
            rows.append({"slot": k, "distance": scene.distance, "angle": scene.angle,
                         "selected": res.index, **bench})
    n = cfg.slots
    extra = {key: v / n for key, v in sums.items()}
    extra["argmax_match"] = matches / n
    overhead = base.overhead_energy * n
    return Metrics(
        workload="rf-combining", slots=n,
        net_harvested_power_W=extra["dynamic"],
        ledger={"stored_initial": 0.0, "stored_final": 0.0,
                "harvested": (sums["dynamic"] * base.window + overhead),
                "delivered": (sums["dynamic"] * base.window + overhead),
                "leaked": 0.0, "spilled": 0.0, "acquisition_overhead": overhead},
        counters={"scenes": n, "argmax_matches": matches},
        extra=extra, trace=rows)


# ---------------------------------------------------------------------------
# Solar forecasting
# ---------------------------------------------------------------------------


def solar_series(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """(training, test) irradiance series in W/m^2."""
    f = cfg.forecast
    per_day = int(round(SLOTS_PER_DAY / f.slot_s))
    n_train = f.train_days * per_day
    if f.irradiance_csv:
        _, values = load_irradiance_csv(f.irradiance_csv)
        if values.size < n_train + cfg.slots:
            raise ValueError(f"{f.irradiance_csv}: {values.size} samples, need "
                             f"{n_train + cfg.slots}")
        return values[:n_train], values[n_train:n_train + cfg.slots]
    rng = rng_stream(cfg.seed, 0, "irradiance")
    series = synthetic_irradiance(n_train + cfg.slots, rng, slot=f.slot_s, peak=f.peak_Wm2,
                                  ar=f.cloud_ar, noise=f.cloud_noise)
    return series[:n_train], series[n_train:]


def run_solar(cfg: ScenarioConfig, trace: bool = False) -> Metrics:
    """Energy-aware transmission scheduling from irradiance forecasts.

    ``forecast_wait`` plans the next attempt at the first slot where the
    forecast harvest covers the missing task energy; if the horizon is too
    short it re-plans a few slots later.  ``fixed_interval`` attempts every
    ``fixed_interval_slots`` regardless.
    """
    f = cfg.forecast
    panel = PanelSpec(f.panel_area_m2, f.xi_pv, f.xi_pmu, f.slot_s)
    train, test = solar_series(cfg)
    if f.coefficients:
        from .forecasting import ArimaModel

        model = ArimaModel(f.p, f.d, np.asarray(f.coefficients), history=list(train))
    else:
        model = arima_fit(train, f.p, f.d)
    pred = one_step_predictions(model, np.concatenate([train[-(f.p + f.d):], test]))
    pred = pred[f.p + f.d:]
    forecast_mse = float(np.mean((pred - test) ** 2))
    naive = np.concatenate([[train[-1]], test[:-1]])
    naive_mse = float(np.mean((naive - test) ** 2))

    spec = storage_spec(cfg)
    state = initial_state(cfg, spec)
    sleep = f.sleep_power_W * f.slot_s
    prev = float(train[-1])
    plan = 0
    sent = failed = 0
    rows: list[dict] | None = [] if trace else None
    for t in range(test.size):
        cur = float(test[t])
        e_h = irradiance_to_energy(prev, cur, panel)
        model.update(cur)
        prev = cur
        attempt = False
        if cfg.policy.name == "fixed_interval":
            attempt = (t + 1) % f.fixed_interval_slots == 0
        elif t >= plan:
            available = state.stored + spec.eta_in * e_h - sleep / spec.eta_out
            need = max(0.0, f.task_energy_J / spec.eta_out - available)
            if need == 0.0:
                attempt = True
            else:
                path = forecast_energies(cur, arima_forecast(model, f.horizon_slots), panel)
                try:
                    plan = t + waiting_slots(need, spec.eta_in * path)
                except InfeasibleWithinHorizon:
                    plan = t + min(f.horizon_slots, 10)
        outcome = ""
        if attempt:
            res = step_energy(state, spec, e_h, f.task_energy_J + sleep, f.slot_s)
            if res.ok:
                state = res.state
                sent += 1
                outcome = "sent"
            else:
                state = step_energy(state, spec, e_h, sleep, f.slot_s, partial=True).state
                failed += 1
                outcome = "failed"
                plan = t + 1
        else:
            state = step_energy(state, spec, e_h, sleep, f.slot_s, partial=True).state
        if rows is not None:
            rows.append({"slot": t, "irradiance": cur, "stored": state.stored,
                         "outcome": outcome})
    hours = test.size * f.slot_s / 3600.0
    return Metrics(
        workload="solar-forecast", slots=cfg.slots,
        task_completion_rate=sent / (sent + failed) if sent + failed else None,
        net_harvested_power_W=(state.harvested - state.acquisition_overhead) / (hours * 3600.0),
        throughput_pph=sent / hours,
        ledger=_ledger(state),
        counters={"sent": sent, "failed_attempts": failed},
        extra={"forecast_mse": forecast_mse, "naive_mse": naive_mse},
        trace=rows)

