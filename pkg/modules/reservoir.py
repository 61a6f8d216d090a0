from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from modules.errors import HorizonError
from modules.qmath import hermitian_eigen

logger = logging.getLogger(__name__)

DEFAULT_N_MODES = 1000
DEFAULT_BANDWIDTH_OVER_KAPPA = 400.0
DEFAULT_CENTER_OVER_KAPPA = 1000.0
NORM_TOL = 1e-10

TREND_N_VALUES = (50, 100, 200, 400)
TREND_BANDWIDTH_OVER_KAPPA = 40.0


def default_kappa_t_samples(kappa_t_max: float = 6.0, step: float = 0.1) -> Tuple[float, ...]:
    """kappa*t = step, 2*step, ..., kappa_t_max."""
    count = int(round(kappa_t_max / step))
    return tuple(round(step * k, 10) for k in range(1, count + 1))


@dataclass(frozen=True)
class ReservoirSpec:
    n_modes: int
    bandwidth: float
    kappa: float
    center_frequency: float = 0.0
    coupling_override: Optional[float] = None

    def __post_init__(self) -> None:
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {self.n_modes}.")
        if not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}.")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa}.")
        if not math.isfinite(self.center_frequency):
            raise ValueError("center_frequency must be finite.")
        if self.coupling_override is not None and not (
            math.isfinite(self.coupling_override) and self.coupling_override >= 0
        ):
            raise ValueError("coupling_override must be a nonnegative number.")

    @classmethod
    def from_kappa(
        cls,
        kappa: float = 1.0,
        n_modes: int = DEFAULT_N_MODES,
        bandwidth_over_kappa: float = DEFAULT_BANDWIDTH_OVER_KAPPA,
        center_over_kappa: float = DEFAULT_CENTER_OVER_KAPPA,
    ) -> "ReservoirSpec":
        return cls(
            n_modes=int(n_modes),
            bandwidth=bandwidth_over_kappa * kappa,
            kappa=kappa,
            center_frequency=center_over_kappa * kappa,
        )

    @property
    def spacing(self) -> float:
        return self.bandwidth / self.n_modes

    @property
    def mode_frequencies(self) -> np.ndarray:
        k = np.arange(1, self.n_modes + 1)
        return self.center_frequency + (k - (self.n_modes + 1) / 2.0) * self.spacing

    @property
    def coupling(self) -> float:
        if self.coupling_override is not None:
            return self.coupling_override
        return math.sqrt(self.kappa * self.spacing / (2.0 * math.pi))

    @property
    def horizon(self) -> float:
        """Recurrence time 2 pi / Delta of the discrete band."""
        return 2.0 * math.pi / self.spacing


@dataclass(frozen=True, eq=False)
class SingleExcitationState:
    cavity_amplitude: complex
    mode_amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if abs(self.norm - 1.0) > NORM_TOL:
            raise ValueError(f"Single-excitation state norm is {self.norm:.12f}.")

    @property
    def mode_population(self) -> float:
        return float(np.sum(np.abs(self.mode_amplitudes) ** 2))

    @property
    def norm(self) -> float:
        return abs(self.cavity_amplitude) ** 2 + self.mode_population


def single_excitation_hamiltonian(
    cavity_frequency: float, mode_frequencies: Sequence[float], couplings: Sequence[complex]
) -> np.ndarray:
    """Hamiltonian on (cavity excited, mode 1 excited, ..., mode N excited).

    ``couplings[k]`` multiplies |mode k><cavity|; its conjugate sits on the
    other side of the diagonal.
    """
    freqs = np.asarray(mode_frequencies, dtype=float)
    g = np.asarray(couplings, dtype=complex)
    if freqs.ndim != 1 or g.shape != freqs.shape:
        raise ValueError("mode_frequencies and couplings must be 1-D arrays of equal length.")
    n = freqs.size
    h = np.zeros((n + 1, n + 1), dtype=complex)
    h[0, 0] = cavity_frequency
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = freqs
    h[1:, 0] = g
    h[0, 1:] = g.conj()
    return h


def build_hamiltonian(spec: ReservoirSpec, eta: float = 0.0, rotating_frame: bool = False) -> np.ndarray:
    """(N+1)x(N+1) Hamiltonian; ``eta`` conjugates the cavity phase into the couplings."""
    couplings = np.full(spec.n_modes, spec.coupling * np.exp(1j * eta))
    offset = spec.center_frequency if rotating_frame else 0.0
    return single_excitation_hamiltonian(
        spec.center_frequency - offset, spec.mode_frequencies - offset, couplings
    )


@lru_cache(maxsize=32)
def _eigensystem(spec: ReservoirSpec, eta: float) -> Tuple[np.ndarray, np.ndarray]:
    logger.debug("Diagonalizing %d-mode reservoir (eta=%.4f)", spec.n_modes, eta)
    evals, evecs = hermitian_eigen(build_hamiltonian(spec, eta, rotating_frame=True))
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return evals, evecs


def _check_time(spec: ReservoirSpec, t: float) -> None:
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"Time must be nonnegative, got {t}.")
    if t >= spec.horizon:
        raise HorizonError(
            f"t = {t:.4f} is at or beyond the recurrence horizon 2*pi/Delta = {spec.horizon:.4f}; "
            "increase n_modes or reduce the span."
        )


def evolve_single_excitation(spec: ReservoirSpec, t: float, eta: float = 0.0) -> SingleExcitationState:
    """exp(-iHt) applied to the excited cavity with every mode in vacuum."""
    _check_time(spec, t)
    evals, evecs = _eigensystem(spec, float(eta))
    amplitudes = evecs @ (np.exp(-1j * evals * t) * evecs[0, :].conj())
    return SingleExcitationState(cavity_amplitude=complex(amplitudes[0]), mode_amplitudes=amplitudes[1:])


def flat_spectrum_deviations(spec: ReservoirSpec, t_samples: Iterable[float]) -> Tuple[float, float]:
    """(max | |c(t)| - exp(-kt/2) |, max | sum_k |b_k(t)|^2 - (1 - exp(-kt)) |)."""
    times = [float(t) for t in t_samples]
    for t in times:
        _check_time(spec, t)
    amplitude_dev = population_dev = 0.0
    for t in times:
        state = evolve_single_excitation(spec, t)
        x = spec.kappa * t
        amplitude_dev = max(amplitude_dev, abs(abs(state.cavity_amplitude) - math.exp(-x / 2.0)))
        population_dev = max(population_dev, abs(state.mode_population + math.expm1(-x)))
    return amplitude_dev, population_dev


def validate_flat_spectrum(spec: ReservoirSpec, t_samples: Iterable[float]) -> float:
    """Largest departure from the flat-spectrum amplitudes xi(t), chi(t) over the samples."""
    return max(flat_spectrum_deviations(spec, t_samples))


def phase_rotation_equivalence(spec: ReservoirSpec, eta: float, t: float) -> float:
    """Max difference of amplitude moduli between H and its cavity-phase-rotated copy."""
    plain = evolve_single_excitation(spec, t)
    rotated = evolve_single_excitation(spec, t, eta=eta)
    cavity = abs(abs(plain.cavity_amplitude) - abs(rotated.cavity_amplitude))
    modes = float(np.max(np.abs(np.abs(plain.mode_amplitudes) - np.abs(rotated.mode_amplitudes))))
    return max(cavity, modes)


def short_time_ratio(spec: ReservoirSpec, kappa_t: float) -> float:
    """(1 - |c|^2) / (kappa t); tends to 0 in the quadratic short-time regime."""
    if kappa_t <= 0:
        raise ValueError("kappa_t must be positive.")
    state = evolve_single_excitation(spec, kappa_t / spec.kappa)
    return (1.0 - abs(state.cavity_amplitude) ** 2) / kappa_t


def convergence_trend(
    n_values: Sequence[int] = TREND_N_VALUES,
    bandwidth_over_kappa: float = TREND_BANDWIDTH_OVER_KAPPA,
    t_samples: Optional[Sequence[float]] = None,
    kappa: float = 1.0,
) -> pd.DataFrame:
    """Flat-spectrum deviation and discretization error per N at fixed W/kappa.

    ``deviation`` sits on the band-edge floor for every N and is reported for
    information only. ``discretization_error`` is the largest |cavity amplitude|
    difference against the finest grid in ``n_values``.
    """
    n_values = sorted(int(n) for n in n_values)
    if not n_values:
        raise ValueError("n_values must be nonempty.")
    if t_samples is None:
        t_samples = [x / kappa for x in default_kappa_t_samples(step=0.01)]
    times = [float(t) for t in t_samples]

    def moduli(spec: ReservoirSpec) -> np.ndarray:
        return np.array([abs(evolve_single_excitation(spec, t).cavity_amplitude) for t in times])

    specs = [ReservoirSpec.from_kappa(kappa, n, bandwidth_over_kappa) for n in n_values]
    reference = moduli(specs[-1])
    records = []
    for spec in specs:
        amplitude_dev, population_dev = flat_spectrum_deviations(spec, times)
        records.append(
            {
                "n_modes": spec.n_modes,
                "deviation": max(amplitude_dev, population_dev),
                "discretization_error": float(np.max(np.abs(moduli(spec) - reference))),
            }
        )
    return pd.DataFrame(records)


def trend_is_converging(frame: pd.DataFrame) -> bool:
    """Discretization error strictly falling with N."""
    errors = frame["discretization_error"].to_numpy()
    return bool(len(errors) > 1 and np.all(np.diff(errors) < 0))
