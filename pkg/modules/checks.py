from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from modules.dynamics import (
    BIRTH_FLOOR,
    analytic_report,
    c2_c1r1,
    c2_cc,
    c2_rr,
    event_times,
    general_event_times,
)
from modules.errors import ConvergenceError, InvariantViolation
from modules.measures import (
    concurrence,
    full_report,
    monogamy_slack,
    pure_three_tangle,
    three_tangle_decomposition_check,
)
from modules.qmath import hermitian_eigen, kron, partial_trace
from modules.reservoir import (
    ReservoirSpec,
    convergence_trend,
    default_kappa_t_samples,
    evolve_single_excitation,
    flat_spectrum_deviations,
    phase_rotation_equivalence,
    short_time_ratio,
    trend_is_converging,
)
from modules.states import (
    C1,
    C2,
    R1,
    R2,
    EffectiveParams,
    GeneralInitialState,
    LUParams,
    effective_builder,
    effective_output_state,
    general_builder,
    general_output_state,
    lu_modulated_output,
    rotation_y,
    xi_chi_swap_check,
)

logger = logging.getLogger(__name__)

TRIPLES = ((C1, R1, C2), (C1, R1, R2), (C1, C2, R2), (R1, C2, R2))
LU_SAMPLE_CAP = 200
TANGLE_SAMPLE_CAP = 100
EVENT_SAMPLE_CAP = 1000

Row = Dict[str, object]


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_general_state(rng: np.random.Generator) -> GeneralInitialState:
    return GeneralInitialState.from_vector(random_pure(rng, 4))


def random_effective(rng: np.random.Generator) -> EffectiveParams:
    return EffectiveParams.from_alpha(
        float(rng.uniform(0.0, 1.0)), gamma=float(rng.uniform(0.0, math.pi)), kappa=float(rng.uniform(0.5, 2.0))
    )


def _row(check: str, samples: int, violation: float, tolerance: float, detail: str = "") -> Row:
    return {"check": check, "samples": int(samples), "max_violation": float(violation), "tolerance": tolerance, "detail": detail}


def suite_qmath(rng: np.random.Generator, samples: int) -> List[Row]:
    n = min(samples, 200)
    recon = trace = ptrace = 0.0
    for _ in range(n):
        q = random_unitary(rng, 4)
        spectrum = rng.normal(size=4)
        h = (q * spectrum) @ q.conj().T
        evals, evecs = hermitian_eigen(h)
        recon = max(recon, float(np.max(np.abs((evecs * evals) @ evecs.conj().T - h))))
        trace = max(trace, abs(float(np.sum(evals)) - float(np.trace(h).real)))
        rho = random_density(rng, 16)
        ptrace = max(ptrace, abs(complex(np.trace(partial_trace(rho, (0, 2)))) - 1.0))
    return [
        _row("eigen_reconstruction", n, recon, 1e-10),
        _row("eigen_trace", n, trace, 1e-10),
        _row("partial_trace_trace", n, ptrace, 1e-12),
    ]


def suite_states(rng: np.random.Generator, samples: int) -> List[Row]:
    n = min(samples, 1000)
    norm = initial = 0.0
    for _ in range(n):
        p = random_effective(rng)
        state = effective_output_state(p, float(rng.uniform(0.0, 6.0)) / p.kappa)
        norm = max(norm, abs(float(np.vdot(state.amplitudes, state.amplitudes).real) - 1.0))
        start = effective_output_state(p, 0.0).amplitudes
        cavities = kron(rotation_y(p.gamma), np.eye(2)) @ np.array([p.alpha, 0.0, 0.0, p.beta])
        expected = np.zeros(16, dtype=complex)
        expected[[0, 2, 8, 10]] = cavities
        initial = max(initial, float(np.max(np.abs(start - expected))))
    swap = xi_chi_swap_check(effective_builder(EffectiveParams.reference()))
    return [
        _row("normalization", n, norm, 1e-12),
        _row("initial_state", n, initial, 1e-12),
        _row("xi_chi_swap_effective", 1, swap, 1e-12),
    ]


def suite_lu_reduction(rng: np.random.Generator, samples: int) -> List[Row]:
    n = min(samples, LU_SAMPLE_CAP)
    gamma, kappa, t = 0.9, 1.0, 1.0
    p = EffectiveParams.reference(gamma=gamma, kappa=kappa)
    reference = full_report(effective_output_state(p, t))
    worst = 0.0
    for _ in range(n):
        zeta, eta, delta = rng.uniform(-math.pi, math.pi, size=3)
        lu = LUParams(zeta=float(zeta), eta=float(eta), gamma=gamma, delta=float(delta))
        report = full_report(lu_modulated_output(lu, p.alpha, p.beta, kappa, t))
        worst = max(worst, report.max_difference(reference))
    return [_row("report_matches_gamma_only", n, worst, 1e-10)]


def suite_measures(rng: np.random.Generator, samples: int) -> List[Row]:
    n = min(samples, 200)
    lu = pivot = pair_sym = 0.0
    for _ in range(n):
        rho = random_density(rng, 4)
        u = kron(random_unitary(rng), random_unitary(rng))
        lu = max(lu, abs(concurrence(rho) - concurrence(u @ rho @ u.conj().T)))
        psi = random_pure(rng, 8)
        tangles = [pure_three_tangle(psi, k) for k in range(3)]
        pivot = max(pivot, max(tangles) - min(tangles))
        p = random_effective(rng)
        report = full_report(effective_output_state(p, float(rng.uniform(0.0, 6.0)) / p.kappa))
        pair_sym = max(pair_sym, abs(report.c2_c1r2 - report.c2_c2r1))
    return [
        _row("concurrence_lu_invariance", n, lu, 1e-10),
        _row("three_tangle_pivot_independence", n, pivot, 1e-10),
        _row("c1r2_equals_c2r1", n, pair_sym, 1e-10),
    ]


def suite_oracle(rng: np.random.Generator, samples: int) -> List[Row]:
    agreement = ems = qb = 0.0
    for _ in range(samples):
        p = random_effective(rng)
        t = float(rng.uniform(0.0, 6.0)) / p.kappa
        report = full_report(effective_output_state(p, t))
        agreement = max(agreement, analytic_report(p, t).max_difference(report))
        ems = max(ems, abs(report.e_bb - 2.0 * report.e_ms))
        qb = max(qb, abs(report.e_bb - report.e_qb_c1 - report.e_qb_r1))
    return [
        _row("closed_forms_vs_state_vector", samples, agreement, 1e-10),
        _row("e_bb_equals_2_e_ms", samples, ems, 1e-10),
        _row("e_bb_equals_qubit_block_sum", samples, qb, 1e-10),
    ]


def suite_conservation(rng: np.random.Generator, samples: int) -> List[Row]:
    worst = 0.0
    n = min(samples, 500)
    for _ in range(n):
        p = random_effective(rng)
        r = full_report(effective_output_state(p, float(rng.uniform(0.0, 6.0)) / p.kappa))
        total = r.e_bb + r.c2_c1c2 + r.c2_c1r2 + r.c2_c2r1 + r.c2_r1r2
        worst = max(worst, abs(total - p.block_concurrence_sq), abs(r.c2_block - p.block_concurrence_sq))
    return [_row("e_bb_plus_cross_pairs_is_4a2b2", n, worst, 1e-10)]


def suite_trends(rng: np.random.Generator, samples: int) -> List[Row]:
    kappa_t = np.round(np.arange(0, 601) * 0.01, 10)
    n = min(samples, 100)
    time_trend = gamma_trend = ridge = 0.0
    correlation = 0
    fine = np.linspace(0.0, 3.0, 3001)
    for _ in range(n):
        p = random_effective(rng)
        t = kappa_t / p.kappa
        time_trend = max(
            time_trend,
            float(np.max(np.diff(c2_cc(p, t)), initial=0.0)),
            float(np.max(-np.diff(c2_rr(p, t)), initial=0.0)),
        )
        x = float(rng.uniform(0.0, 6.0))
        by_gamma = [c2_cc(p.with_gamma(g), x / p.kappa) for g in np.linspace(0.0, math.pi, 25)]
        gamma_trend = max(gamma_trend, float(np.max(-np.diff(by_gamma), initial=0.0)))

        curve = np.asarray(c2_c1r1(p, fine / p.kappa))
        if curve.max() > 1e-6:
            ridge = max(ridge, max(0.0, abs(fine[int(np.argmax(curve))] - math.log(2.0)) - 1e-3))

        # reservoir entanglement is born late exactly when the cavity pair dies suddenly
        birth = event_times(p).esb_r1r2
        if birth is None:
            correlation += int(float(c2_rr(p, 1e-3 / p.kappa)) == 0.0)
        else:
            correlation += int(float(c2_rr(p, 0.5 * birth)) > 0.0)
    return [
        _row("time_monotone", n, time_trend, 1e-12),
        _row("gamma_monotone", n, gamma_trend, 1e-12),
        _row("c1r1_peak_at_ln2", n, ridge, 0.0),
        _row("esd_iff_esb", n, float(correlation), 0.0),
    ]


def suite_three_tangle(rng: np.random.Generator, samples: int) -> List[Row]:
    n = min(samples, TANGLE_SAMPLE_CAP)
    worst = 0.0
    for _ in range(n):
        p = EffectiveParams.reference(gamma=float(rng.uniform(0.0, math.pi)))
        state = effective_output_state(p, float(rng.uniform(0.0, 6.0)))
        for triple in TRIPLES:
            result = three_tangle_decomposition_check(state, triple, require_zero_tangle=False)
            worst = max(worst, result.max_tangle, result.reconstruction_error)
    return [_row("branch_split_zero_tangle", n * len(TRIPLES), worst, 1e-10)]


def suite_monogamy_symmetry(rng: np.random.Generator, samples: int) -> List[Row]:
    slack = swap = 0.0
    for _ in range(samples):
        init = random_general_state(rng)
        x = float(rng.uniform(0.0, 6.0))
        slack = max(slack, -monogamy_slack(general_output_state(init, 1.0, x)))
        swap = max(swap, xi_chi_swap_check(general_builder(init), (x,)))
    return [
        _row("monogamy_slack", samples, max(slack, 0.0), 1e-10),
        _row("xi_chi_swap_general", samples, swap, 1e-12),
    ]


def suite_general_events(rng: np.random.Generator, samples: int) -> List[Row]:
    p = EffectiveParams.reference()
    analytic = event_times(p)
    numeric = general_event_times(GeneralInitialState.symmetric(p.alpha, p.beta), p.kappa)
    symmetric = max(abs(numeric.esd_c1c2 - analytic.esd_c1c2), abs(numeric.esb_r1r2 - analytic.esb_r1r2))

    n = min(samples, EVENT_SAMPLE_CAP)
    relation = 0.0
    with_both = missing = 0
    for _ in range(n):
        try:
            found = general_event_times(random_general_state(rng), 1.0)
        except InvariantViolation as exc:
            logger.warning("General event search failed: %s", exc)
            missing += 1
            continue
        if found.esd_c1c2 is None:
            continue
        expected = -math.log(-math.expm1(-found.esd_c1c2))
        if found.esb_r1r2 is None:
            missing += int(expected >= BIRTH_FLOOR)
            continue
        with_both += 1
        relation = max(relation, abs(found.esb_r1r2 - expected))
    return [
        _row("matches_closed_form", 1, symmetric, 1e-9),
        _row("esb_follows_esd", n, relation, 1e-6, detail=f"{with_both} state(s) with both events"),
        _row("unpaired_esd", n, float(missing), 0.0),
    ]


def suite_reservoir(rng: np.random.Generator, samples: int, spec: Optional[ReservoirSpec] = None) -> List[Row]:
    spec = spec or ReservoirSpec.from_kappa()
    kappa_t = default_kappa_t_samples()
    amplitude_dev, population_dev = flat_spectrum_deviations(spec, [x / spec.kappa for x in kappa_t])
    norm = max(abs(evolve_single_excitation(spec, x / spec.kappa).norm - 1.0) for x in kappa_t)
    small = ReservoirSpec.from_kappa(spec.kappa, n_modes=200, bandwidth_over_kappa=spec.bandwidth / spec.kappa)
    etas = [1.3, math.pi] + [float(e) for e in rng.uniform(0.0, 2.0 * math.pi, size=min(samples, 3))]
    phase = max(phase_rotation_equivalence(small, eta, 1.0 / spec.kappa) for eta in etas)
    ratios = [short_time_ratio(spec, x) for x in (1e-3, 1e-4)]
    trend = convergence_trend(kappa=spec.kappa)
    return [
        _row("flat_spectrum_amplitude", len(kappa_t), amplitude_dev, 5e-3),
        _row("flat_spectrum_population", len(kappa_t), population_dev, 5e-3),
        _row("norm_conservation", len(kappa_t), norm, 1e-10),
        _row("phase_rotation_moduli", len(etas), phase, 1e-10),
        _row(
            "short_time_quadratic",
            2,
            max(0.0, ratios[0] - 0.1) + max(0.0, ratios[1] - ratios[0]),
            0.0,
            detail=", ".join(f"{r:.3e}" for r in ratios),
        ),
        _row(
            "n_convergence",
            len(trend),
            0.0 if trend_is_converging(trend) else 1.0,
            0.0,
            detail=", ".join(f"N={n}: {e:.2e}" for n, e in zip(trend["n_modes"], trend["discretization_error"])),
        ),
    ]


SUITES: Dict[str, Callable[[np.random.Generator, int], List[Row]]] = {
    "qmath": suite_qmath,
    "states": suite_states,
    "lu_reduction": suite_lu_reduction,
    "measures": suite_measures,
    "oracle": suite_oracle,
    "conservation": suite_conservation,
    "trends": suite_trends,
    "three_tangle": suite_three_tangle,
    "monogamy_symmetry": suite_monogamy_symmetry,
    "general_events": suite_general_events,
    "reservoir": suite_reservoir,
}


def run_all_suites(
    seed: int = 42,
    samples: int = 1000,
    tolerance_scale: float = 1.0,
    suites: Optional[List[str]] = None,
) -> Dict[str, object]:
    """Run the named suites (all by default) and return ``passed`` plus ``suites_df``.

    ``tolerance_scale`` multiplies every tolerance. A negative scale fails every
    check, zero-tolerance checks included.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1.")
    names = list(SUITES) if suites is None else list(suites)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suite(s): {', '.join(unknown)}.")

    rows: List[Row] = []
    for index, name in enumerate(SUITES):
        if name not in names:
            continue
        rng = np.random.default_rng([seed, index])
        try:
            suite_rows = SUITES[name](rng, samples)
        except (InvariantViolation, ConvergenceError, ValueError) as exc:
            logger.warning("Suite %s raised: %s", name, exc)
            suite_rows = [_row("raised", 0, math.inf, 0.0, detail=str(exc))]
        for row in suite_rows:
            tolerance = row["tolerance"] * tolerance_scale
            passed = tolerance_scale >= 0 and row["max_violation"] <= tolerance
            rows.append({"suite": name, **row, "tolerance": tolerance, "passed": passed})

    suites_df = pd.DataFrame(rows, columns=["suite", "check", "samples", "max_violation", "tolerance", "passed", "detail"])
    passed = bool(suites_df["passed"].all()) if not suites_df.empty else True
    logger.info("Invariant suites: %d check(s), %s", len(suites_df), "all passed" if passed else "FAILURES")
    return {"passed": passed, "suites_df": suites_df}
