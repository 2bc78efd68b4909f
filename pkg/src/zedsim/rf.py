"""Dynamic RF combining for an M-antenna RF harvester.

The device sits at the origin with a uniform linear array; one isotropic
source is placed in a disk around it under line of sight.  Per-antenna
received power follows a log-distance law.  Combined DC output for phase
vector theta is

    P(theta) = eta * P_ant * |sum_k exp(j(phi_k + theta_k))|^2 / M

so the codebook-average equals the omnidirectional (DC-combining) output
eta * P_ant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .energy import ContractError


@dataclass(frozen=True)
class RfScene:
    antennas: int
    distance: float = 50.0  # m
    angle: float = 0.0  # rad, measured from the array axis
    tx_power: float = 10.0  # W
    path_loss_exponent: float = 2.7
    reference_loss_db: float = 40.0  # at 1 m
    eh_efficiency: float = 0.5
    spacing: float = 0.5  # wavelengths
    p_tune: float = 0.0  # W per phase shifter while tuning
    p_measure: float = 0.0  # W per EI measurement
    t_tune: float = 1e-3  # s
    t_measure: float = 1e-3  # s
    probe_duration: float = 0.0  # s spent harvesting on each tested entry
    window: float = 1.0  # s, exploration + exploitation cycle

    def __post_init__(self) -> None:
        if self.antennas < 1:
            raise ContractError("need M >= 1 antennas")
        if not 0 < self.eh_efficiency <= 1:
            raise ContractError("EH efficiency must lie in (0, 1]")
        if self.p_tune < 0 or self.p_measure < 0:
            raise ContractError("overhead powers must be >= 0")
        if not self.window > 0 or self.probe_duration * self.antennas > self.window:
            raise ContractError("exploration must fit in the window")

    @property
    def antenna_power(self) -> float:
        d = max(self.distance, 1.0)
        loss_db = self.reference_loss_db + 10.0 * self.path_loss_exponent * math.log10(d)
        return self.tx_power * 10.0 ** (-loss_db / 10.0)

    @property
    def array_phases(self) -> np.ndarray:
        k = np.arange(self.antennas)
        return 2.0 * np.pi * self.spacing * k * math.cos(self.angle)

    @property
    def overhead_energy(self) -> float:
        m = self.antennas
        return m * ((m - 1) * self.p_tune * self.t_tune + self.p_measure * self.t_measure)


def dft_codebook(m: int) -> np.ndarray:
    """Phase matrix: row m holds antenna phases 2*pi*k*m/M."""
    if m < 1:
        raise ContractError("need M >= 1")
    k = np.arange(m)
    return 2.0 * np.pi * np.outer(k, k) / m


def static_phases(m: int) -> np.ndarray:
    return np.pi * (np.arange(m) % 2)


def rf_dc_power(scene: RfScene, phases: np.ndarray) -> float | np.ndarray:
    """DC output for one phase vector, or for each row of a phase matrix."""
    phases = np.asarray(phases, dtype=float)
    field = np.exp(1j * (scene.array_phases + phases)).sum(axis=-1)
    return scene.eh_efficiency * scene.antenna_power * np.abs(field) ** 2 / scene.antennas


def dc_combining_power(scene: RfScene) -> float:
    return scene.eh_efficiency * scene.antenna_power


class ExploreResult(NamedTuple):
    index: int
    net_power: float
    measured: np.ndarray


def rf_explore_exploit(scene: RfScene, rng: np.random.Generator | None = None,
                       noise_std: float = 0.0) -> ExploreResult:
    """Test every codebook entry, keep the best measured one for the rest of
    the window.  Net power accounts for the harvest lost while probing and
    the tuning/measurement energy."""
    book = dft_codebook(scene.antennas)
    true = np.atleast_1d(rf_dc_power(scene, book))
    measured = true.copy()
    if noise_std and rng is not None:
        measured = measured + rng.normal(0.0, noise_std, measured.shape)
    idx = int(np.argmax(measured))
    t_p = scene.probe_duration
    exploit_t = scene.window - scene.antennas * t_p
    harvested = true.sum() * t_p + true[idx] * exploit_t
    net = (harvested - scene.overhead_energy) / scene.window
    return ExploreResult(idx, float(net), measured)


def rf_benchmarks(scene: RfScene) -> dict[str, float]:
    book = dft_codebook(scene.antennas)
    powers = np.atleast_1d(rf_dc_power(scene, book))
    return {
        "dc": float(dc_combining_power(scene)),
        "static": float(rf_dc_power(scene, static_phases(scene.antennas))),
        "dynamic": rf_explore_exploit(scene).net_power,
        "genie": float(powers.max()),
    }


def random_scene(rng: np.random.Generator, base: RfScene, radius: float = 100.0) -> RfScene:
    """Source uniformly distributed over a disk centred on the device."""
    r = radius * math.sqrt(rng.random())
    a = 2.0 * math.pi * rng.random()
    return replace(base, distance=r, angle=a)
