from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Iterable, Sequence, Tuple, Union

import numpy as np

from modules.qmath import IDENTITY_2, kron, partial_trace, purification_factor

logger = logging.getLogger(__name__)

# qubit order (c1, r1, c2, r2); each pair maps |10> to xi|10> + chi|01>
C1, R1, C2, R2 = 0, 1, 2, 3
QUBIT_NAMES = ("c1", "r1", "c2", "r2")
QUBITS = {name: index for index, name in enumerate(QUBIT_NAMES)}

NORM_TOL = 1e-12
GAMMA_TOL = 1e-12

DEFAULT_ALPHA = 1.0 / math.sqrt(10.0)
DEFAULT_BETA = 3.0 / math.sqrt(10.0)

SWAP_CHECK_GRID = tuple(round(0.1 * k, 10) for k in range(1, 31))

QubitRef = Union[int, str]


def resolve_qubits(qubits: Iterable[QubitRef]) -> Tuple[int, ...]:
    """Map qubit names ('c1', 'r2', ...) or indices to indices, preserving order."""
    resolved = []
    for qubit in qubits:
        if isinstance(qubit, str):
            key = qubit.strip().lower()
            if key not in QUBITS:
                raise ValueError(f"Unknown qubit '{qubit}'; expected one of {', '.join(QUBIT_NAMES)}.")
            resolved.append(QUBITS[key])
        else:
            index = int(qubit)
            if not 0 <= index < len(QUBIT_NAMES):
                raise ValueError(f"Qubit index {index} out of range.")
            resolved.append(index)
    return tuple(resolved)


def _check_amplitude_pair(alpha: float, beta: float) -> None:
    for name, value in (("alpha", alpha), ("beta", beta)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}.")
    if abs(alpha**2 + beta**2 - 1.0) > NORM_TOL:
        raise ValueError(f"alpha^2 + beta^2 must equal 1, got {alpha**2 + beta**2:.15f}.")


def _check_rate(kappa: float) -> None:
    if not (math.isfinite(kappa) and kappa > 0):
        raise ValueError(f"kappa must be a positive rate, got {kappa}.")


@dataclass(frozen=True)
class EffectiveParams:
    """Symmetric initial state alpha|00> + beta|11>, rotated by R_y(gamma) on c1, decaying at kappa."""

    alpha: float
    beta: float
    gamma: float = 0.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        _check_amplitude_pair(self.alpha, self.beta)
        if not -GAMMA_TOL <= self.gamma <= math.pi + GAMMA_TOL:
            raise ValueError(f"gamma must lie in [0, pi], got {self.gamma}.")
        _check_rate(self.kappa)

    @classmethod
    def reference(cls, gamma: float = 0.0, kappa: float = 1.0) -> "EffectiveParams":
        return cls(alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, gamma=gamma, kappa=kappa)

    @classmethod
    def from_alpha(cls, alpha: float, gamma: float = 0.0, kappa: float = 1.0) -> "EffectiveParams":
        return cls(alpha=alpha, beta=math.sqrt(max(0.0, 1.0 - alpha**2)), gamma=gamma, kappa=kappa)

    def with_gamma(self, gamma: float) -> "EffectiveParams":
        return replace(self, gamma=gamma)

    @property
    def cos_half_sq(self) -> float:
        return math.cos(self.gamma / 2.0) ** 2

    @property
    def block_concurrence_sq(self) -> float:
        """4 alpha^2 beta^2, the conserved C^2 across c1r1|c2r2."""
        return 4.0 * self.alpha**2 * self.beta**2


def rotation_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_z(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


@dataclass(frozen=True)
class LUParams:
    """Single-qubit unitary e^{i zeta} R_z(eta) R_y(gamma) R_z(delta)."""

    zeta: float = 0.0
    eta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("zeta", "eta", "gamma", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"LU angle {name} must be finite.")

    def matrix(self) -> np.ndarray:
        return np.exp(1j * self.zeta) * (rotation_z(self.eta) @ rotation_y(self.gamma) @ rotation_z(self.delta))


@dataclass(frozen=True)
class DissipationAmplitudes:
    xi: float
    chi: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.xi <= 1.0 and 0.0 <= self.chi <= 1.0):
            raise ValueError(f"Amplitudes must lie in [0, 1], got xi={self.xi}, chi={self.chi}.")
        if abs(self.xi**2 + self.chi**2 - 1.0) > NORM_TOL:
            raise ValueError("xi^2 + chi^2 must equal 1.")

    def swapped(self) -> "DissipationAmplitudes":
        return DissipationAmplitudes(xi=self.chi, chi=self.xi)


@dataclass(frozen=True, eq=False)
class FourQubitState:
    """Normalized pure state over |c1 r1 c2 r2>."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != 16:
            raise ValueError(f"A four-qubit state needs 16 amplitudes, got {amps.size}.")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"State norm is {norm:.15f}, expected 1.")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def amplitude(self, bits: str) -> complex:
        """Amplitude of a basis label such as '1010' (c1 r1 c2 r2)."""
        return complex(self.amplitudes[int(bits, 2)])

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def factor(self, keep: Sequence[QubitRef]) -> np.ndarray:
        return purification_factor(self.amplitudes, resolve_qubits(keep))


@dataclass(frozen=True)
class GeneralInitialState:
    """(a1|00> + a2|01> + a3|10> + a4|11>)_{c1c2} with both reservoirs in vacuum."""

    a1: complex
    a2: complex
    a3: complex
    a4: complex

    def __post_init__(self) -> None:
        norm = float(np.sum(np.abs(self.vector) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"Initial amplitudes have norm {norm:.15f}, expected 1.")

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "GeneralInitialState":
        values = [complex(v) for v in vector]
        if len(values) != 4:
            raise ValueError("A two-qubit initial state needs exactly 4 amplitudes.")
        return cls(*values)

    @classmethod
    def symmetric(cls, alpha: float, beta: float) -> "GeneralInitialState":
        return cls(alpha, 0.0, 0.0, beta)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3, self.a4], dtype=complex)


def amplitudes_for_kappa_t(kappa_t: float) -> DissipationAmplitudes:
    if not (math.isfinite(kappa_t) and kappa_t >= 0):
        raise ValueError(f"kappa*t must be a nonnegative number, got {kappa_t}.")
    return DissipationAmplitudes(xi=math.exp(-kappa_t / 2.0), chi=math.sqrt(-math.expm1(-kappa_t)))


def dissipation_amplitudes(kappa: float, t: float) -> DissipationAmplitudes:
    """xi(t) = exp(-kappa t / 2), chi(t) = sqrt(1 - exp(-kappa t))."""
    _check_rate(kappa)
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"Time must be nonnegative, got {t}.")
    return amplitudes_for_kappa_t(kappa * t)


VACUUM_PAIR = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


def excited_pair(amps: DissipationAmplitudes) -> np.ndarray:
    """xi|10> + chi|01> on one (cavity, reservoir) pair."""
    return np.array([0.0, amps.chi, amps.xi, 0.0], dtype=complex)


def pair_isometry(amps: DissipationAmplitudes) -> np.ndarray:
    """4x2 map from a cavity qubit (reservoir in vacuum) to the pair state."""
    return np.column_stack([VACUUM_PAIR, excited_pair(amps)])


def effective_state_from_amplitudes(p: EffectiveParams, amps: DissipationAmplitudes) -> FourQubitState:
    c, s = math.cos(p.gamma / 2.0), math.sin(p.gamma / 2.0)
    phi = excited_pair(amps)
    psi = p.alpha * np.kron(c * VACUUM_PAIR + s * phi, VACUUM_PAIR) - p.beta * np.kron(
        s * VACUUM_PAIR - c * phi, phi
    )
    return FourQubitState(psi)


def effective_output_state(p: EffectiveParams, t: float) -> FourQubitState:
    """Output state of the R_y(gamma)-modulated symmetric state after time t."""
    return effective_state_from_amplitudes(p, dissipation_amplitudes(p.kappa, t))


def _evolve_cavities(initial: np.ndarray, amps: DissipationAmplitudes) -> FourQubitState:
    w = pair_isometry(amps)
    return FourQubitState(np.kron(w, w) @ initial)


def general_state_from_amplitudes(init: GeneralInitialState, amps: DissipationAmplitudes) -> FourQubitState:
    return _evolve_cavities(init.vector, amps)


def general_output_state(init: GeneralInitialState, kappa: float, t: float) -> FourQubitState:
    return general_state_from_amplitudes(init, dissipation_amplitudes(kappa, t))


def lu_modulated_output(lu: LUParams, alpha: float, beta: float, kappa: float, t: float) -> FourQubitState:
    """Exact output when the full unitary U(zeta, eta, gamma, delta) acts on c1 before the decay."""
    _check_amplitude_pair(alpha, beta)
    amps = dissipation_amplitudes(kappa, t)
    symmetric = np.array([alpha, 0.0, 0.0, beta], dtype=complex)
    initial = kron(lu.matrix(), IDENTITY_2) @ symmetric
    return _evolve_cavities(initial, amps)


def reduced_density(state: FourQubitState, subsystems: Sequence[QubitRef]) -> np.ndarray:
    return partial_trace(state.density(), resolve_qubits(subsystems))


StateBuilder = Callable[[DissipationAmplitudes], FourQubitState]


def effective_builder(p: EffectiveParams) -> StateBuilder:
    return partial(effective_state_from_amplitudes, p)


def general_builder(init: GeneralInitialState) -> StateBuilder:
    return partial(general_state_from_amplitudes, init)


def xi_chi_swap_check(builder: StateBuilder, kappa_t_values: Iterable[float] = SWAP_CHECK_GRID) -> float:
    """Max entrywise |rho_c1c2(xi, chi) - rho_r1r2(chi, xi)| over the sampled kappa*t values."""
    deviation = 0.0
    for kappa_t in kappa_t_values:
        amps = amplitudes_for_kappa_t(float(kappa_t))
        rho_cavities = reduced_density(builder(amps), (C1, C2))
        rho_reservoirs = reduced_density(builder(amps.swapped()), (R1, R2))
        deviation = max(deviation, float(np.max(np.abs(rho_cavities - rho_reservoirs))))
    logger.debug("xi<->chi swap deviation %.3e", deviation)
    return deviation
