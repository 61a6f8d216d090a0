from __future__ import annotations

import math

import numpy as np
import pytest

from modules.states import (
    C1,
    C2,
    R1,
    R2,
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DissipationAmplitudes,
    EffectiveParams,
    FourQubitState,
    GeneralInitialState,
    LUParams,
    dissipation_amplitudes,
    effective_builder,
    effective_output_state,
    general_builder,
    general_output_state,
    lu_modulated_output,
    reduced_density,
    resolve_qubits,
    xi_chi_swap_check,
)


def test_effective_params_validation() -> None:
    with pytest.raises(ValueError):
        EffectiveParams(alpha=0.6, beta=0.6)
    with pytest.raises(ValueError):
        EffectiveParams(alpha=-0.6, beta=0.8)
    with pytest.raises(ValueError):
        EffectiveParams(alpha=0.6, beta=0.8, gamma=4.0)
    with pytest.raises(ValueError):
        EffectiveParams(alpha=0.6, beta=0.8, kappa=0.0)


def test_reference_block_concurrence(reference_params: EffectiveParams) -> None:
    assert reference_params.alpha == pytest.approx(1.0 / math.sqrt(10.0))
    assert reference_params.block_concurrence_sq == pytest.approx(0.36)


def test_dissipation_amplitudes_profile() -> None:
    amps = dissipation_amplitudes(2.0, 0.5)

    assert amps.xi == pytest.approx(math.exp(-0.5))
    assert amps.xi**2 + amps.chi**2 == pytest.approx(1.0, abs=1e-15)
    assert amps.swapped() == DissipationAmplitudes(xi=amps.chi, chi=amps.xi)
    with pytest.raises(ValueError):
        dissipation_amplitudes(1.0, -0.1)


def test_initial_state_is_rotated_symmetric_state() -> None:
    p = EffectiveParams.reference(gamma=0.8)
    state = effective_output_state(p, 0.0)
    c, s = math.cos(0.4), math.sin(0.4)

    assert state.amplitude("0000") == pytest.approx(DEFAULT_ALPHA * c)
    assert state.amplitude("1000") == pytest.approx(DEFAULT_ALPHA * s)
    assert state.amplitude("0010") == pytest.approx(-DEFAULT_BETA * s)
    assert state.amplitude("1010") == pytest.approx(DEFAULT_BETA * c)
    assert np.sum(np.abs(state.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_long_time_state_has_photons_in_reservoirs(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params, 40.0)

    assert abs(state.amplitude("0000")) == pytest.approx(DEFAULT_ALPHA, abs=1e-8)
    assert abs(state.amplitude("0101")) == pytest.approx(DEFAULT_BETA, abs=1e-8)


def test_four_qubit_state_is_read_only(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params, 1.0)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 1.0
    with pytest.raises(ValueError):
        FourQubitState(np.ones(16))


def test_resolve_qubits_accepts_names_and_indices() -> None:
    assert resolve_qubits(("c1", "r2", 1)) == (C1, R2, R1)
    with pytest.raises(ValueError):
        resolve_qubits(("c3",))


def test_symmetric_general_state_matches_effective(reference_params: EffectiveParams) -> None:
    init = GeneralInitialState.symmetric(reference_params.alpha, reference_params.beta)
    general = general_output_state(init, 1.0, 0.7)
    effective = effective_output_state(reference_params, 0.7)

    assert np.max(np.abs(general.amplitudes - effective.amplitudes)) < 1e-14


def test_general_initial_state_must_be_normalized() -> None:
    with pytest.raises(ValueError):
        GeneralInitialState(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        GeneralInitialState.from_vector([1.0, 0.0, 0.0])


def test_lu_phases_leave_reduced_moduli_alone() -> None:
    plain = lu_modulated_output(LUParams(gamma=0.9), DEFAULT_ALPHA, DEFAULT_BETA, 1.0, 1.2)
    dressed = lu_modulated_output(
        LUParams(zeta=0.3, eta=-1.1, gamma=0.9, delta=2.4), DEFAULT_ALPHA, DEFAULT_BETA, 1.0, 1.2
    )

    for pair in ((C1, C2), (R1, R2), (C1, R2)):
        a = np.linalg.eigvalsh(reduced_density(plain, pair))
        b = np.linalg.eigvalsh(reduced_density(dressed, pair))
        assert a == pytest.approx(b, abs=1e-12)


def test_gamma_only_lu_reproduces_effective_state() -> None:
    p = EffectiveParams.reference(gamma=1.7)
    lu_state = lu_modulated_output(LUParams(gamma=1.7), p.alpha, p.beta, 1.0, 0.9)

    assert np.max(np.abs(lu_state.amplitudes - effective_output_state(p, 0.9).amplitudes)) < 1e-14


def test_reduced_density_has_unit_trace(reference_params: EffectiveParams) -> None:
    state = effective_output_state(reference_params, 0.4)
    for pair in ((C1, R1), (C2, R2), ("c1", "c2")):
        assert np.trace(reduced_density(state, pair)).real == pytest.approx(1.0, abs=1e-12)


def test_xi_chi_swap_maps_cavities_to_reservoirs(rng: np.random.Generator) -> None:
    assert xi_chi_swap_check(effective_builder(EffectiveParams.reference(gamma=0.5))) < 1e-12

    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    init = GeneralInitialState.from_vector(v / np.linalg.norm(v))
    assert xi_chi_swap_check(general_builder(init)) < 1e-12


def _cavity_components(p: EffectiveParams, t: float) -> list:
    amps = dissipation_amplitudes(p.kappa, t)
    c, s, xi, chi = math.cos(p.gamma / 2.0), math.sin(p.gamma / 2.0), amps.xi, amps.chi
    a, b = p.alpha, p.beta
    # basis |c1 c2>: 00, 01, 10, 11
    return [
        np.array([a * c, -b * s * xi, a * s * xi, b * c * xi**2]),
        np.array([b * s * chi, 0.0, -b * c * xi * chi, 0.0]),
        np.array([a * s * chi, b * c * xi * chi, 0.0, 0.0]),
        np.array([b * c * chi**2, 0.0, 0.0, 0.0]),
    ]


@pytest.mark.parametrize("gamma, kappa_t", [(0.0, 0.0), (0.0, 0.8), (0.6, 0.3), (1.2, 1.7), (2.4, 4.0), (math.pi, 2.5)])
def test_cavity_pair_is_sum_of_four_branches(gamma: float, kappa_t: float) -> None:
    p = EffectiveParams(alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, gamma=gamma, kappa=1.0)
    expected = sum(np.outer(v, v.conj()) for v in _cavity_components(p, kappa_t))

    rho = reduced_density(effective_output_state(p, kappa_t), (C1, C2))

    assert np.max(np.abs(rho - expected)) < 1e-12


@pytest.mark.parametrize("kappa_t", [0.0, 0.1, 1.0, 3.0])
def test_xi_chi_swap_for_complex_example(kappa_t: float) -> None:
    init = GeneralInitialState(0.5, 0.5j, -0.5, 0.5)

    assert xi_chi_swap_check(general_builder(init), (kappa_t,)) < 1e-12
