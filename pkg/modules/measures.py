from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np

from modules.errors import InvariantViolation
from modules.qmath import SIGMA_Y, kron, psd_sqrt, purification_factor, validate_density_matrix
from modules.states import C1, C2, R1, R2, QUBIT_NAMES, FourQubitState, QubitRef, resolve_qubits

logger = logging.getLogger(__name__)

YY = kron(SIGMA_Y, SIGMA_Y)

CLAMP_TOL = 1e-10
QUBIT_BLOCK_ERROR_TOL = 1e-8
EBB_EMS_ERROR_TOL = 1e-8
SUPPORT_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-10
TANGLE_TOL = 1e-10
WEIGHT_TOL = 1e-12

CROSS_PAIRS = ((C1, C2), (C1, R2), (R1, C2), (R1, R2))
ALL_PAIRS = tuple(combinations(range(4), 2))
PAIR_BLOCKS = ((C1, R1), (C2, R2))


def _clamp(value: float, what: str, error_tol: float = CLAMP_TOL) -> float:
    if value < -error_tol:
        raise InvariantViolation(f"{what} is negative ({value:.3e}) beyond tolerance {error_tol:.0e}.")
    return max(0.0, float(value))


def wootters_margin(factor: np.ndarray) -> float:
    """sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4) for the two-qubit state rho = F F^dagger.

    The sqrt(l_i) are the singular values of F^T (Y x Y) F, which share their
    squares with the eigenvalues of rho (Y x Y) rho* (Y x Y). Unclipped.
    """
    factor = np.asarray(factor, dtype=complex)
    if factor.ndim != 2 or factor.shape[0] != 4:
        raise ValueError(f"A two-qubit factor needs 4 rows, got shape {factor.shape}.")
    roots = np.linalg.svd(factor.T @ YY @ factor, compute_uv=False)
    return float(roots[0] - np.sum(roots[1:]))


def concurrence_from_factor(factor: np.ndarray) -> float:
    return max(0.0, wootters_margin(factor))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = validate_density_matrix(rho, dim=4)
    return concurrence_from_factor(psd_sqrt(rho))


def pair_concurrence_squared(state: FourQubitState, i: QubitRef, j: QubitRef) -> float:
    return concurrence_from_factor(state.factor((i, j))) ** 2


def linear_entropy_tangle(rho) -> float:
    """tau = 2(1 - tr rho^2) of a single-qubit density matrix."""
    rho = validate_density_matrix(rho, dim=2)
    purity = float(np.real(np.trace(rho @ rho)))
    return _clamp(2.0 * (1.0 - purity), "Linear entropy")


def _qubit_tangle(state_or_psi, qubit: int) -> float:
    amplitudes = state_or_psi.amplitudes if isinstance(state_or_psi, FourQubitState) else state_or_psi
    f = purification_factor(amplitudes, (qubit,))
    return linear_entropy_tangle(f @ f.conj().T)


def _check_bipartition(side: Sequence[int]) -> Tuple[int, ...]:
    side = tuple(side)
    if len(side) != 2 or len(set(side)) != 2:
        raise ValueError(f"A 2|2 bipartition needs two distinct qubits on one side, got {side}.")
    return side


def block_concurrence_squared(state: FourQubitState, bipartition: Sequence[QubitRef] = (C1, R1)) -> float:
    """Squared I-concurrence 2(1 - tr rho_A^2) across the 2|2 cut with ``bipartition`` on side A."""
    side = _check_bipartition(resolve_qubits(bipartition))
    f = state.factor(side)
    rho = f @ f.conj().T
    purity = float(np.sum(np.abs(rho) ** 2))
    return _clamp(2.0 * (1.0 - purity), "Block concurrence")


def qubit_to_block_concurrence_squared(
    state: FourQubitState, qubit: QubitRef, block: Sequence[QubitRef] = (C2, R2)
) -> float:
    """C^2_{qubit|block}, with the block's support embedded as a logical qubit.

    The block must have a support of dimension at most 2 in the three-party
    reduction; the projection onto that support is an isometry, so Wootters'
    formula applies to the resulting two-qubit state.
    """
    (q,) = resolve_qubits((qubit,))
    b = resolve_qubits(block)
    if len(b) != 2 or len({q, *b}) != 3:
        raise ValueError(f"Qubit {q} and block {b} must name three distinct qubits.")

    tensor = state.factor((q, *b)).reshape(2, 4, 2)
    block_factor = tensor.transpose(1, 0, 2).reshape(4, 4)
    u, singular, _ = np.linalg.svd(block_factor)
    rank = int(np.sum(singular > SUPPORT_TOL * singular[0]))
    if rank > 2:
        raise ValueError(
            f"Block {tuple(QUBIT_NAMES[k] for k in b)} has support dimension {rank}; "
            "the logical-qubit embedding needs at most 2."
        )
    basis = u[:, :2]
    logical = np.einsum("bl,qbe->qle", basis.conj(), tensor).reshape(4, 2)
    return concurrence_from_factor(logical) ** 2


def qubit_block_entanglement(state: FourQubitState, qubit: QubitRef, block: Sequence[QubitRef] = (C2, R2)) -> float:
    """E_{q-B} = C^2_{i|jk} - C^2_{ij} - C^2_{ik}."""
    (q,) = resolve_qubits((qubit,))
    b = resolve_qubits(block)
    value = qubit_to_block_concurrence_squared(state, q, b)
    value -= pair_concurrence_squared(state, q, b[0]) + pair_concurrence_squared(state, q, b[1])
    return _clamp(value, "Qubit-block entanglement", QUBIT_BLOCK_ERROR_TOL)


def monogamy_slack(state: FourQubitState) -> float:
    """C^2_{c1r1|c2r2} minus the four cross-pair squared concurrences; unclipped."""
    block = block_concurrence_squared(state, (C1, R1))
    return block - sum(pair_concurrence_squared(state, i, j) for i, j in CROSS_PAIRS)


def residual_entanglement(state: FourQubitState) -> float:
    """Two-qubit residual entanglement M_{c1r1} across the c1r1|c2r2 cut."""
    return _clamp(monogamy_slack(state), "Residual entanglement")


def average_multipartite(state: FourQubitState) -> float:
    """E_ms = (sum_i tau_i - 2 sum_{i>j} C^2_ij) / 4 over all four qubits."""
    taus = sum(_qubit_tangle(state, q) for q in range(4))
    pairs = sum(pair_concurrence_squared(state, i, j) for i, j in ALL_PAIRS)
    return _clamp((taus - 2.0 * pairs) / 4.0, "Average multipartite entanglement")


def block_block_entanglement(state: FourQubitState, verify: bool = True) -> float:
    """E_BB, the residual entanglement M_{c1r1}.

    With ``verify`` the identity E_BB = 2 E_ms is asserted; it holds for the
    cavity-reservoir states built in ``modules.states`` but not for arbitrary
    four-qubit states (GHZ gives M = 1, E_ms = 1).
    """
    value = residual_entanglement(state)
    if verify:
        gap = abs(value - 2.0 * average_multipartite(state))
        if gap > EBB_EMS_ERROR_TOL:
            raise InvariantViolation(f"E_BB and 2 E_ms differ by {gap:.3e}.")
    return value


def pure_three_tangle(psi, pivot: int = 0) -> float:
    """CKW three-tangle tau_i - C^2_ij - C^2_ik of a normalized three-qubit state."""
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != 8:
        raise ValueError(f"A three-qubit state needs 8 amplitudes, got {psi.size}.")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > WEIGHT_TOL:
        raise ValueError(f"Three-qubit state norm is {norm:.15f}, expected 1.")
    if pivot not in (0, 1, 2):
        raise ValueError(f"pivot must be 0, 1 or 2, got {pivot}.")

    others = [k for k in range(3) if k != pivot]
    tau = _qubit_tangle(psi, pivot)
    pairs = sum(concurrence_from_factor(purification_factor(psi, (pivot, k))) ** 2 for k in others)
    return _clamp(tau - pairs, "Three-tangle")


@dataclass(frozen=True)
class ThreeTangleDecomposition:
    triple: Tuple[int, int, int]
    weights: Tuple[float, ...]
    components: Tuple[np.ndarray, ...]
    tangles: Tuple[float, ...]
    reconstruction_error: float

    @property
    def max_tangle(self) -> float:
        return max(self.tangles, default=0.0)


def three_tangle_decomposition_check(
    state: FourQubitState, triple: Sequence[QubitRef], require_zero_tangle: bool = True
) -> ThreeTangleDecomposition:
    """Split rho_{ijk} into the two branches labelled by the traced qubit's basis state.

    Each branch is a pure three-qubit state; the mixture must rebuild the
    reduced density matrix, and for the cavity-reservoir states every branch
    carries zero three-tangle.
    """
    triple = resolve_qubits(triple)
    if len(triple) != 3 or len(set(triple)) != 3:
        raise ValueError(f"triple must name three distinct qubits, got {triple}.")

    branches = state.factor(triple)
    weights: List[float] = []
    components: List[np.ndarray] = []
    for column in branches.T:
        weight = float(np.vdot(column, column).real)
        if weight <= WEIGHT_TOL:
            continue
        weights.append(weight)
        components.append(column / np.sqrt(weight))

    if abs(sum(weights) - 1.0) > WEIGHT_TOL:
        raise InvariantViolation(f"Branch weights sum to {sum(weights):.15f}.")

    mixture = sum(w * np.outer(c, c.conj()) for w, c in zip(weights, components))
    target = branches @ branches.conj().T
    error = float(np.max(np.abs(mixture - target)))
    if error > RECONSTRUCTION_TOL:
        raise InvariantViolation(f"Branch mixture misses rho_{triple} by {error:.3e}.")

    tangles = tuple(pure_three_tangle(c) for c in components)
    result = ThreeTangleDecomposition(
        triple=triple,
        weights=tuple(weights),
        components=tuple(components),
        tangles=tangles,
        reconstruction_error=error,
    )
    if require_zero_tangle and result.max_tangle > TANGLE_TOL:
        raise InvariantViolation(f"Branch three-tangle {result.max_tangle:.3e} exceeds {TANGLE_TOL:.0e}.")
    return result


REPORT_FIELDS = (
    "c2_c1c2",
    "c2_r1r2",
    "c2_c1r1",
    "c2_c2r2",
    "c2_c1r2",
    "c2_c2r1",
    "e_bb",
    "e_qb_c1",
    "e_qb_r1",
    "e_ms",
    "c2_block",
)


@dataclass(frozen=True)
class EntanglementReport:
    c2_c1c2: float
    c2_r1r2: float
    c2_c1r1: float
    c2_c2r2: float
    c2_c1r2: float
    c2_c2r1: float
    e_bb: float
    e_qb_c1: float
    e_qb_r1: float
    e_ms: float
    c2_block: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)

    def max_difference(self, other: "EntanglementReport") -> float:
        mine, theirs = self.as_dict(), other.as_dict()
        return max(abs(mine[k] - theirs[k]) for k in REPORT_FIELDS)


def full_report(state: FourQubitState) -> EntanglementReport:
    """Every quantity at one point, from the state vector alone."""
    values = {
        "c2_c1c2": pair_concurrence_squared(state, C1, C2),
        "c2_r1r2": pair_concurrence_squared(state, R1, R2),
        "c2_c1r1": pair_concurrence_squared(state, C1, R1),
        "c2_c2r2": pair_concurrence_squared(state, C2, R2),
        "c2_c1r2": pair_concurrence_squared(state, C1, R2),
        "c2_c2r1": pair_concurrence_squared(state, C2, R1),
        "e_bb": residual_entanglement(state),
        "e_qb_c1": qubit_block_entanglement(state, C1, (C2, R2)),
        "e_qb_r1": qubit_block_entanglement(state, R1, (C2, R2)),
        "e_ms": average_multipartite(state),
        "c2_block": block_concurrence_squared(state, (C1, R1)),
    }
    for key, value in values.items():
        if value > 1.0 + CLAMP_TOL:
            raise InvariantViolation(f"{key} = {value:.12f} exceeds 1.")
    return EntanglementReport(**values)
