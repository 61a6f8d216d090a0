from __future__ import annotations

import math

import numpy as np
import pytest

from modules.dynamics import (
    analytic_report,
    c2_c1r1,
    c2_c1r2,
    c2_c2r2,
    c2_cc,
    c2_qubit_block,
    c2_rr,
    critical_angles,
    e_bb,
    e_qb_c1,
    e_qb_r1,
    event_times,
    general_event_times,
    general_scan,
    plateau,
    scan_frame,
    scan_grid,
    transfer_summary,
)
from modules.measures import REPORT_FIELDS, full_report
from modules.states import EffectiveParams, GeneralInitialState, effective_output_state

GAMMA_WINDOW = 2.0 * math.acos(math.sqrt(2.0 / 3.0))
GAMMA_ROUTE = 2.0 * math.acos(math.sqrt(1.0 / 3.0))


def test_closed_forms_at_origin(reference_params: EffectiveParams) -> None:
    assert c2_cc(reference_params, 0.0) == pytest.approx(0.36)
    assert c2_rr(reference_params, 0.0) == 0.0
    assert c2_c1r1(reference_params, 0.0) == 0.0
    assert e_bb(reference_params, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_closed_forms_accept_arrays(reference_params: EffectiveParams) -> None:
    t = np.linspace(0.0, 6.0, 13)
    values = c2_cc(reference_params, t)

    assert isinstance(values, np.ndarray)
    assert values.shape == (13,)
    assert isinstance(c2_cc(reference_params, 1.0), float)
    with pytest.raises(ValueError):
        c2_cc(reference_params, -1.0)


def test_closed_forms_match_state_vector_oracle() -> None:
    for gamma in (0.0, 0.9, GAMMA_WINDOW, GAMMA_ROUTE, 2.6, math.pi):
        p = EffectiveParams.reference(gamma=gamma)
        for t in (0.0, 0.1, 0.5, math.log(2.0), 1.5, 3.0, 6.0):
            oracle = full_report(effective_output_state(p, t))
            assert analytic_report(p, t).max_difference(oracle) < 1e-10


def test_c2r2_does_not_depend_on_gamma(reference_params: EffectiveParams) -> None:
    assert c2_c2r2(reference_params.with_gamma(2.0), 0.7) == pytest.approx(c2_c2r2(reference_params, 0.7))


def test_c1r1_peaks_at_ln2(reference_params: EffectiveParams) -> None:
    t = np.linspace(0.0, 3.0, 30001)
    for gamma in (0.0, 1.0, 2.5):
        curve = c2_c1r1(reference_params.with_gamma(gamma), t)
        assert t[int(np.argmax(curve))] == pytest.approx(math.log(2.0), abs=1e-4)


def test_qubit_block_parts_sum_to_block_block(reference_params: EffectiveParams) -> None:
    p = reference_params.with_gamma(0.4)
    t = np.linspace(0.0, 6.0, 61)

    assert np.allclose(np.asarray(e_qb_c1(p, t)) + np.asarray(e_qb_r1(p, t)), e_bb(p, t), atol=1e-14)
    assert c2_qubit_block(p, 1.0) + c2_qubit_block(p, 1.0, reservoir_qubit=True) == pytest.approx(0.36)


def test_event_times_for_reference_parameters(reference_params: EffectiveParams) -> None:
    times = event_times(reference_params)

    assert times.esd_c1c2 == pytest.approx(math.log(1.5), abs=1e-9)
    assert times.esb_r1r2 == pytest.approx(math.log(3.0), abs=1e-9)
    assert times.esd_c1r2 == pytest.approx(-math.log(0.5 * (1 + math.sqrt(5.0 / 9.0))), abs=1e-9)
    assert times.esb_c1r2 == pytest.approx(-math.log(0.5 * (1 - math.sqrt(5.0 / 9.0))), abs=1e-9)


def test_event_times_scale_with_kappa() -> None:
    fast = event_times(EffectiveParams.reference(kappa=2.0))

    assert fast.esd_c1c2 == pytest.approx(math.log(1.5) / 2.0)
    assert fast.esb_r1r2 == pytest.approx(math.log(3.0) / 2.0)


def test_esb_follows_from_esd() -> None:
    for gamma in (0.0, 0.5, 1.2, 1.8):
        times = event_times(EffectiveParams.reference(gamma=gamma))
        expected = -math.log(1.0 - math.exp(-times.esd_c1c2))
        assert times.esb_r1r2 == pytest.approx(expected, abs=1e-9)


def test_no_sudden_death_beyond_route_angle() -> None:
    assert event_times(EffectiveParams.reference(gamma=3.0)).esd_c1c2 is None
    bell = EffectiveParams(alpha=1 / math.sqrt(2.0), beta=1 / math.sqrt(2.0))
    assert event_times(bell).as_dict() == {"esd_c1c2": None, "esb_r1r2": None, "esd_c1r2": None, "esb_c1r2": None}


def test_curves_vanish_between_events(reference_params: EffectiveParams) -> None:
    times = event_times(reference_params)

    assert c2_cc(reference_params, times.esd_c1c2 + 1e-6) == 0.0
    assert c2_cc(reference_params, times.esd_c1c2 - 1e-3) > 0.0
    assert c2_rr(reference_params, times.esb_r1r2 - 1e-6) == 0.0
    assert c2_rr(reference_params, times.esb_r1r2 + 1e-3) > 0.0


def test_critical_angles(reference_params: EffectiveParams) -> None:
    angles = critical_angles(reference_params)

    assert angles.gamma_window == pytest.approx(1.23096, abs=1e-5)
    assert angles.gamma_route == pytest.approx(1.91063, abs=1e-5)
    assert critical_angles(EffectiveParams(alpha=0.8, beta=0.6)).as_dict() == {
        "gamma_window": None,
        "gamma_route": None,
    }
    with pytest.raises(ValueError):
        critical_angles(EffectiveParams(alpha=1.0, beta=0.0))


def test_plateau_for_reference_parameters(reference_params: EffectiveParams) -> None:
    flat = plateau(reference_params)

    assert flat.start == pytest.approx(math.log(1.5))
    assert flat.end == pytest.approx(math.log(3.0))
    assert flat.width == pytest.approx(math.log(2.0))
    assert flat.value == pytest.approx(0.36)
    assert e_bb(reference_params, 0.5 * (flat.start + flat.end)) == pytest.approx(0.36, abs=1e-12)


def test_plateau_collapses_to_point_at_window_angle(reference_params: EffectiveParams) -> None:
    flat = plateau(reference_params.with_gamma(GAMMA_WINDOW))

    assert flat is not None
    assert flat.width == pytest.approx(0.0, abs=1e-6)
    assert flat.start == pytest.approx(math.log(2.0), abs=1e-6)


def test_no_plateau_past_window_angle(reference_params: EffectiveParams) -> None:
    assert plateau(reference_params.with_gamma(1.5)) is None
    assert plateau(reference_params.with_gamma(math.pi)) is None


def test_block_block_vanishes_at_pi(reference_params: EffectiveParams) -> None:
    t = np.linspace(0.0, 6.0, 601)
    assert np.max(e_bb(reference_params.with_gamma(math.pi), t)) < 1e-12


def test_general_events_match_closed_form(reference_params: EffectiveParams) -> None:
    init = GeneralInitialState.symmetric(reference_params.alpha, reference_params.beta)
    numeric = general_event_times(init, 1.0)
    analytic = event_times(reference_params)

    assert numeric.esd_c1c2 == pytest.approx(analytic.esd_c1c2, abs=1e-9)
    assert numeric.esb_r1r2 == pytest.approx(analytic.esb_r1r2, abs=1e-9)
    assert numeric.esd_c1r2 is None


def test_general_events_absent_for_bell_state() -> None:
    init = GeneralInitialState(1 / math.sqrt(2.0), 0.0, 0.0, 1 / math.sqrt(2.0))
    times = general_event_times(init, 1.0)

    assert times.esd_c1c2 is None
    assert times.esb_r1r2 is None


def test_general_events_for_complex_amplitudes() -> None:
    init = GeneralInitialState(0.2, 0.1j, -0.1, 1j * math.sqrt(0.94))
    times = general_event_times(init, 1.0)

    assert times.esd_c1c2 is not None
    assert times.esb_r1r2 == pytest.approx(-math.log(1.0 - math.exp(-times.esd_c1c2)), abs=1e-6)


def test_general_events_reject_bad_kappa(reference_params: EffectiveParams) -> None:
    with pytest.raises(ValueError):
        general_event_times(GeneralInitialState.symmetric(reference_params.alpha, reference_params.beta), 0.0)


def test_scan_grid_is_gamma_major(reference_params: EffectiveParams) -> None:
    rows = scan_grid(reference_params, [0.0, 0.5, 1.0], [0.0, math.pi])
    frame = scan_frame(rows)

    assert list(frame.columns) == ["gamma", "kappa_t", *REPORT_FIELDS]
    assert list(frame["gamma"]) == [0.0, 0.0, 0.0, math.pi, math.pi, math.pi]
    assert list(frame["kappa_t"]) == [0.0, 0.5, 1.0, 0.0, 0.5, 1.0]
    assert frame.loc[0, "c2_c1c2"] == pytest.approx(0.36)
    assert all(row.deviation < 1e-10 for row in rows)
    with pytest.raises(ValueError):
        scan_grid(reference_params, [], [0.0])


def test_transfer_summary_for_reference_parameters(reference_params: EffectiveParams) -> None:
    summary = transfer_summary(reference_params)

    assert summary["initial_c2_c1c2"] == pytest.approx(0.36)
    assert summary["has_plateau"] is True
    assert summary["plateau_width_kappa_t"] == pytest.approx(math.log(2.0))
    assert summary["e_bb_peak"] == pytest.approx(0.36)
    assert summary["asymptotic_c2_r1r2"] == pytest.approx(0.36)


def test_transfer_summary_at_pi_has_no_block_block(reference_params: EffectiveParams) -> None:
    summary = transfer_summary(reference_params.with_gamma(math.pi))

    assert summary["has_plateau"] is False
    assert summary["plateau_width_kappa_t"] is None
    assert summary["e_bb_peak"] < 1e-12
    assert summary["max_cross_sum"] > 0.0


def test_general_scan_columns_and_slack() -> None:
    init = GeneralInitialState(0.5, 0.5, 0.5, 0.5j)
    frame = general_scan(init, 1.0, np.linspace(0.0, 3.0, 7))

    assert list(frame.columns) == ["kappa_t", *REPORT_FIELDS, "monogamy_slack"]
    assert len(frame) == 7
    assert (frame["monogamy_slack"] >= -1e-10).all()
    with pytest.raises(ValueError):
        general_scan(init, 1.0, [])


@pytest.mark.parametrize("gamma", list(np.linspace(0.0, GAMMA_WINDOW, 50, endpoint=False)))
def test_plateau_width_below_window_angle(reference_params: EffectiveParams, gamma: float) -> None:
    flat = plateau(reference_params.with_gamma(gamma))

    assert flat is not None
    assert flat.width == pytest.approx(math.log(3.0 * math.cos(gamma / 2.0) ** 2 - 1.0), abs=1e-9)


@pytest.mark.parametrize("death_kappa_t", [3.5, 4.0, 6.0, 8.0])
def test_late_death_finds_early_birth(death_kappa_t: float) -> None:
    ratio = -math.expm1(-death_kappa_t)
    alpha = ratio / math.sqrt(1.0 + ratio**2)
    init = GeneralInitialState(alpha, 0.0, 0.0, 1j * math.sqrt(1.0 - alpha**2))

    times = general_event_times(init, 1.0)

    assert times.esd_c1c2 == pytest.approx(death_kappa_t, abs=1e-8)
    assert times.esb_r1r2 is not None
    assert times.esb_r1r2 < 0.05
    assert times.esb_r1r2 == pytest.approx(-math.log(ratio), rel=1e-6)
