from __future__ import annotations

import math

import numpy as np
import pytest

from modules.errors import InvariantViolation
from modules.measures import (
    average_multipartite,
    block_block_entanglement,
    block_concurrence_squared,
    concurrence,
    full_report,
    linear_entropy_tangle,
    monogamy_slack,
    pair_concurrence_squared,
    pure_three_tangle,
    qubit_block_entanglement,
    qubit_to_block_concurrence_squared,
    three_tangle_decomposition_check,
    wootters_margin,
)
from modules.qmath import kron
from modules.states import (
    C1,
    C2,
    R1,
    R2,
    EffectiveParams,
    FourQubitState,
    dissipation_amplitudes,
    effective_output_state,
    reduced_density,
)

BELL = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / math.sqrt(2.0)
GHZ3 = np.array([1, 0, 0, 0, 0, 0, 0, 1], dtype=complex) / math.sqrt(2.0)
W3 = np.array([0, 1, 1, 0, 1, 0, 0, 0], dtype=complex) / math.sqrt(3.0)


def _werner(p: float) -> np.ndarray:
    return p * np.outer(BELL, BELL.conj()) + (1.0 - p) * np.eye(4) / 4.0


def test_concurrence_of_textbook_states() -> None:
    assert concurrence(np.outer(BELL, BELL.conj())) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(np.eye(4) / 4.0) == pytest.approx(0.0, abs=1e-12)
    product = np.zeros((4, 4), dtype=complex)
    product[0, 0] = 1.0
    assert concurrence(product) == pytest.approx(0.0, abs=1e-12)


def test_werner_concurrence_threshold() -> None:
    assert concurrence(_werner(0.2)) == pytest.approx(0.0, abs=1e-12)
    assert concurrence(_werner(0.6)) == pytest.approx((3 * 0.6 - 1) / 2, abs=1e-12)


def test_wootters_margin_is_unclipped() -> None:
    assert wootters_margin(np.sqrt(np.eye(4) / 4.0)) == pytest.approx(-0.5, abs=1e-12)


def test_concurrence_rejects_bad_input() -> None:
    with pytest.raises(ValueError):
        concurrence(np.eye(2) / 2.0)
    with pytest.raises(ValueError):
        concurrence(np.eye(4))


def test_concurrence_is_local_unitary_invariant(rng: np.random.Generator) -> None:
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    q1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    q2, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    u = kron(q1, q2)

    assert concurrence(u @ rho @ u.conj().T) == pytest.approx(concurrence(rho), abs=1e-10)


def test_linear_entropy_tangle_bounds() -> None:
    assert linear_entropy_tangle(np.eye(2) / 2.0) == pytest.approx(1.0)
    assert linear_entropy_tangle(np.diag([1.0, 0.0])) == pytest.approx(0.0)


def test_three_tangle_of_ghz_and_w() -> None:
    for pivot in range(3):
        assert pure_three_tangle(GHZ3, pivot) == pytest.approx(1.0, abs=1e-12)
        assert pure_three_tangle(W3, pivot) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        pure_three_tangle(GHZ3 * 2.0)
    with pytest.raises(ValueError):
        pure_three_tangle(GHZ3, pivot=3)


def test_initial_state_entanglement_lives_between_cavities(reference_params: EffectiveParams) -> None:
    report = full_report(effective_output_state(reference_params, 0.0))

    assert report.c2_c1c2 == pytest.approx(0.36, abs=1e-12)
    assert report.c2_r1r2 == pytest.approx(0.0, abs=1e-12)
    assert report.e_bb == pytest.approx(0.0, abs=1e-12)
    assert report.c2_block == pytest.approx(0.36, abs=1e-12)


def test_block_concurrence_is_conserved(reference_params: EffectiveParams) -> None:
    for t in (0.0, 0.3, 1.0, 4.0):
        state = effective_output_state(reference_params, t)
        assert block_concurrence_squared(state) == pytest.approx(0.36, abs=1e-12)
        assert block_concurrence_squared(state, ("c2", "r2")) == pytest.approx(0.36, abs=1e-12)


def test_qubit_block_concurrence_closed_form(reference_params: EffectiveParams) -> None:
    t = 0.8
    state = effective_output_state(reference_params, t)

    assert qubit_to_block_concurrence_squared(state, C1) == pytest.approx(0.36 * math.exp(-t), abs=1e-12)
    assert qubit_to_block_concurrence_squared(state, R1) == pytest.approx(0.36 * -math.expm1(-t), abs=1e-12)
    with pytest.raises(ValueError):
        qubit_to_block_concurrence_squared(state, C2, (C2, R2))


def test_qubit_block_needs_two_dimensional_support() -> None:
    psi = np.zeros(16, dtype=complex)
    # c1r1 maximally entangled with c2r2, so the block support is four-dimensional
    for k, (c2, r2) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        psi[8 * (k // 2) + 4 * (k % 2) + 2 * c2 + r2] = 0.5
    with pytest.raises(ValueError):
        qubit_to_block_concurrence_squared(FourQubitState(psi), C1)


def test_block_block_equals_twice_average_multipartite(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params, 0.8)

    assert block_block_entanglement(state) == pytest.approx(2.0 * average_multipartite(state), abs=1e-10)
    assert block_block_entanglement(state) == pytest.approx(0.36, abs=1e-10)


def test_block_block_identity_fails_for_ghz() -> None:
    ghz = np.zeros(16, dtype=complex)
    ghz[0] = ghz[15] = 1.0 / math.sqrt(2.0)
    state = FourQubitState(ghz)

    assert block_block_entanglement(state, verify=False) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvariantViolation):
        block_block_entanglement(state)


def test_monogamy_slack_equals_block_block(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params.with_gamma(2.5), 1.4)

    assert monogamy_slack(state) >= -1e-12
    assert monogamy_slack(state) == pytest.approx(full_report(state).e_bb, abs=1e-12)


def test_qubit_block_entanglement_sums_to_block_block(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params.with_gamma(0.6), 1.1)
    total = qubit_block_entanglement(state, C1) + qubit_block_entanglement(state, R1)

    assert total == pytest.approx(block_block_entanglement(state), abs=1e-10)


def test_cross_pairs_are_symmetric(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params.with_gamma(1.0), 0.5)

    assert pair_concurrence_squared(state, C1, R2) == pytest.approx(pair_concurrence_squared(state, C2, R1), abs=1e-12)


@pytest.mark.parametrize("triple", [(C1, R1, C2), (C1, R1, R2), (C1, C2, R2), (R1, C2, R2)])
def test_three_tangle_branches_vanish(triple) -> None:
    state = effective_output_state(EffectiveParams.reference(gamma=0.7), 1.3)
    result = three_tangle_decomposition_check(state, triple)

    assert sum(result.weights) == pytest.approx(1.0, abs=1e-12)
    assert result.reconstruction_error < 1e-12
    assert result.max_tangle < 1e-10


def test_full_report_fields_lie_in_unit_interval(reference_params: EffectiveParams) -> None:
    report = full_report(effective_output_state(reference_params.with_gamma(1.9), 2.0))
    for value in report.as_dict().values():
        assert 0.0 <= value <= 1.0


def _c1r1c2_branches(p: EffectiveParams, t: float) -> tuple:
    amps = dissipation_amplitudes(p.kappa, t)
    c, s, xi, chi = math.cos(p.gamma / 2.0), math.sin(p.gamma / 2.0), amps.xi, amps.chi
    a, b = p.alpha, p.beta
    # basis |c1 r1 c2>, index 4*c1 + 2*r1 + c2
    first = np.zeros(8, dtype=complex)
    first[[0, 1, 2, 3, 4, 5]] = [a * c, -b * s * xi, a * s * chi, b * c * xi * chi, a * s * xi, b * c * xi**2]
    second = np.zeros(8, dtype=complex)
    second[[0, 2, 4]] = [b * s * chi, -b * c * chi**2, -b * c * xi * chi]
    return first, second


@pytest.mark.parametrize("gamma, kappa_t", [(0.0, 0.5), (0.4, 1.0), (1.1, 0.2), (1.9, 2.2), (2.8, 3.5)])
def test_c1r1c2_splits_into_tangle_free_branches(gamma: float, kappa_t: float) -> None:
    p = EffectiveParams.reference(gamma=gamma)
    first, second = _c1r1c2_branches(p, kappa_t)
    rho = reduced_density(effective_output_state(p, kappa_t), (C1, R1, C2))

    assert np.max(np.abs(rho - np.outer(first, first.conj()) - np.outer(second, second.conj()))) < 1e-12
    for branch in (first, second):
        norm = np.linalg.norm(branch)
        if norm > 1e-12:
            assert pure_three_tangle(branch / norm) < 1e-10
