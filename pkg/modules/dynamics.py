from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from modules.errors import ConvergenceError, InvariantViolation
from modules.measures import (
    REPORT_FIELDS,
    EntanglementReport,
    full_report,
    monogamy_slack,
    wootters_margin,
)
from modules.states import (
    C1,
    C2,
    R1,
    R2,
    EffectiveParams,
    GeneralInitialState,
    amplitudes_for_kappa_t,
    effective_output_state,
    general_state_from_amplitudes,
)

logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-10
ZERO_TOL = 1e-12
SIGN_STEP = 1e-9
PLATEAU_TOL = 1e-9
ROOT_XTOL = 1e-10
ROOT_MAX_ITER = 200
HORIZON_KAPPA_T = 30.0
GENERAL_GRID_POINTS = 601
BIRTH_FLOOR = 1e-7
BIRTH_GRID_START = 1e-8
BIRTH_PREFIX_POINTS = 241
BIRTH_REL_TOL = 1e-2
BIRTH_NOISE = 1e-15
RELATION_TOL = 1e-6


def _kappa_t(p: EffectiveParams, t):
    x = p.kappa * np.asarray(t, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("Times must be finite and nonnegative.")
    return x


def _out(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def _profile(p: EffectiveParams, t):
    """(xi^2, chi^2, xi*chi) at kappa*t."""
    x = _kappa_t(p, t)
    xi2 = np.exp(-x)
    chi2 = -np.expm1(-x)
    return xi2, chi2, np.sqrt(xi2 * chi2)


def c2_cc(p: EffectiveParams, t):
    """C^2_{c1c2} = 4 [max(a b xi^2 - b^2 xi^2 chi^2 cos^2(g/2), 0)]^2."""
    xi2, chi2, _ = _profile(p, t)
    inner = p.alpha * p.beta * xi2 - p.beta**2 * xi2 * chi2 * p.cos_half_sq
    return _out(4.0 * np.maximum(inner, 0.0) ** 2)


def c2_rr(p: EffectiveParams, t):
    """C^2_{r1r2} = 4 [max(a b chi^2 - b^2 xi^2 chi^2 cos^2(g/2), 0)]^2."""
    xi2, chi2, _ = _profile(p, t)
    inner = p.alpha * p.beta * chi2 - p.beta**2 * xi2 * chi2 * p.cos_half_sq
    return _out(4.0 * np.maximum(inner, 0.0) ** 2)


def c2_c1r1(p: EffectiveParams, t):
    xi2, chi2, _ = _profile(p, t)
    return _out(xi2 * chi2 * (1.0 + (p.beta**2 - p.alpha**2) * math.cos(p.gamma)) ** 2)


def c2_c2r2(p: EffectiveParams, t):
    """Independent of gamma: 4 b^4 xi^2 chi^2."""
    xi2, chi2, _ = _profile(p, t)
    return _out(4.0 * p.beta**4 * xi2 * chi2)


def c2_c1r2(p: EffectiveParams, t):
    """C^2_{c1r2} = C^2_{c2r1} = 4 [max(a b xi chi - b^2 xi^2 chi^2 cos^2(g/2), 0)]^2."""
    xi2, chi2, xichi = _profile(p, t)
    inner = p.alpha * p.beta * xichi - p.beta**2 * xi2 * chi2 * p.cos_half_sq
    return _out(4.0 * np.maximum(inner, 0.0) ** 2)


c2_c2r1 = c2_c1r2


def c2_qubit_block(p: EffectiveParams, t, reservoir_qubit: bool = False):
    """C^2_{c1|c2r2} = 4a^2b^2 xi^2, or C^2_{r1|c2r2} = 4a^2b^2 chi^2 for the reservoir qubit."""
    xi2, chi2, _ = _profile(p, t)
    return _out(p.block_concurrence_sq * (chi2 if reservoir_qubit else xi2))


def e_qb_c1(p: EffectiveParams, t):
    value = np.asarray(c2_qubit_block(p, t)) - np.asarray(c2_cc(p, t)) - np.asarray(c2_c1r2(p, t))
    return _out(np.maximum(value, 0.0))


def e_qb_r1(p: EffectiveParams, t):
    value = np.asarray(c2_qubit_block(p, t, reservoir_qubit=True)) - np.asarray(c2_rr(p, t)) - np.asarray(c2_c2r1(p, t))
    return _out(np.maximum(value, 0.0))


def e_bb(p: EffectiveParams, t):
    """E_BB = 4a^2b^2 - (C^2_{c1c2} + C^2_{r1r2} + 2 C^2_{c1r2})."""
    cross = np.asarray(c2_cc(p, t)) + np.asarray(c2_rr(p, t)) + 2.0 * np.asarray(c2_c1r2(p, t))
    return _out(np.maximum(p.block_concurrence_sq - cross, 0.0))


def analytic_report(p: EffectiveParams, t: float) -> EntanglementReport:
    block_block = float(e_bb(p, t))
    return EntanglementReport(
        c2_c1c2=float(c2_cc(p, t)),
        c2_r1r2=float(c2_rr(p, t)),
        c2_c1r1=float(c2_c1r1(p, t)),
        c2_c2r2=float(c2_c2r2(p, t)),
        c2_c1r2=float(c2_c1r2(p, t)),
        c2_c2r1=float(c2_c2r1(p, t)),
        e_bb=block_block,
        e_qb_c1=float(e_qb_c1(p, t)),
        e_qb_r1=float(e_qb_r1(p, t)),
        e_ms=0.5 * block_block,
        c2_block=p.block_concurrence_sq,
    )


@dataclass(frozen=True)
class EventTimes:
    esd_c1c2: Optional[float] = None
    esb_r1r2: Optional[float] = None
    esd_c1r2: Optional[float] = None
    esb_c1r2: Optional[float] = None

    def as_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass(frozen=True)
class CriticalAngles:
    gamma_window: Optional[float] = None
    gamma_route: Optional[float] = None

    def as_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass(frozen=True)
class Plateau:
    start: float
    end: float
    width: float
    value: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def _verify_root(name: str, factor: Callable[[float], float], x: float, falling: bool) -> None:
    """The sign-carrying factor must vanish at x and change sign across x +/- SIGN_STEP."""
    at_root = factor(x)
    if abs(at_root) > ZERO_TOL:
        raise InvariantViolation(f"{name}: curve factor is {at_root:.3e} at kappa*t = {x:.12f}, expected 0.")
    sides = [(x + SIGN_STEP, -1.0 if falling else 1.0)]
    if x - SIGN_STEP >= 0.0:
        sides.append((x - SIGN_STEP, 1.0 if falling else -1.0))
    for point, sign in sides:
        value = factor(point)
        if value * sign < 0 and abs(value) > ZERO_TOL:
            raise InvariantViolation(f"{name}: no sign change at kappa*t = {x:.12f} (value {value:.3e} at {point:.12f}).")


def _window_bounds(alpha: float, weight: float, tol: float = 0.0):
    """kappa*t bounds of the c1r2 zero window, where xi*chi >= alpha / weight."""
    if weight <= 0.0:
        return None
    r = alpha / weight
    disc = 1.0 - 4.0 * r * r
    if disc < -tol:
        return None
    root = math.sqrt(max(disc, 0.0))
    upper, lower = 0.5 * (1.0 + root), 0.5 * (1.0 - root)
    if lower <= 0.0:
        return None
    return -math.log(upper), -math.log(lower)


def event_times(p: EffectiveParams) -> EventTimes:
    """ESD/ESB times of the c1c2, r1r2 and c1r2 curves, each checked by a sign change."""
    a, b, c2 = p.alpha, p.beta, p.cos_half_sq
    weight = b * c2
    if a <= 0.0 or weight <= a:
        logger.debug("No ESD: beta cos^2(gamma/2) = %.6f <= alpha = %.6f", weight, a)
        return EventTimes()

    ratio = a / weight
    x_esd = -math.log1p(-ratio)
    x_esb = math.log(weight / a)
    _verify_root("ESD c1c2", lambda x: a - weight * -math.expm1(-x), x_esd, falling=True)
    _verify_root("ESB r1r2", lambda x: a - weight * math.exp(-x), x_esb, falling=False)

    window = None
    if weight > 2.0 * a:
        window = _window_bounds(a, weight)
    x_w_esd = x_w_esb = None
    if window is not None:
        x_w_esd, x_w_esb = window

        def factor(x: float) -> float:
            return a - weight * math.sqrt(math.exp(-x) * -math.expm1(-x))

        if x_w_esb - x_w_esd >= 2.0 * SIGN_STEP:
            _verify_root("ESD c1r2", factor, x_w_esd, falling=True)
            _verify_root("ESB c1r2", factor, x_w_esb, falling=False)
        elif max(abs(factor(x_w_esd)), abs(factor(x_w_esb))) > ZERO_TOL:
            raise InvariantViolation("c1r2 window bounds are not zeros of the curve.")

    k = p.kappa
    return EventTimes(
        esd_c1c2=x_esd / k,
        esb_r1r2=x_esb / k,
        esd_c1r2=None if x_w_esd is None else x_w_esd / k,
        esb_c1r2=None if x_w_esb is None else x_w_esb / k,
    )


def critical_angles(p: EffectiveParams) -> CriticalAngles:
    """gamma_route = 2 arccos sqrt(a/b); gamma_window = 2 arccos sqrt(2a/b); absent past 1."""
    if p.beta <= 0:
        raise ValueError("Critical angles need beta > 0.")

    def angle(ratio: float) -> Optional[float]:
        return 2.0 * math.acos(math.sqrt(ratio)) if ratio <= 1.0 else None

    return CriticalAngles(gamma_window=angle(2.0 * p.alpha / p.beta), gamma_route=angle(p.alpha / p.beta))


def plateau(p: EffectiveParams) -> Optional[Plateau]:
    """Maximal interval where all four cross-pair concurrences vanish together.

    On it E_BB sits at 4 a^2 b^2. A window that has collapsed to a point is
    kept (width 0) within PLATEAU_TOL.
    """
    a, weight = p.alpha, p.beta * p.cos_half_sq
    if a <= 0.0 or weight <= a:
        return None
    window = _window_bounds(a, weight, tol=PLATEAU_TOL)
    if window is None:
        return None

    x_esd = -math.log1p(-a / weight)
    x_esb = math.log(weight / a)
    start = max(x_esd, window[0])
    end = min(x_esb, window[1])
    if end < start - PLATEAU_TOL:
        return None
    width = max(0.0, end - start)
    k = p.kappa
    return Plateau(start=start / k, end=max(end, start) / k, width=width / k, value=p.block_concurrence_sq)


def _margin_curve(init: GeneralInitialState, pair, kappa_t: float) -> float:
    state = general_state_from_amplitudes(init, amplitudes_for_kappa_t(kappa_t))
    return wootters_margin(state.factor(pair))


def _find_root(f: Callable[[float], float], lo: float, hi: float) -> float:
    xtol = ROOT_XTOL * min(1.0, hi)
    root, info = bisect(f, lo, hi, xtol=xtol, maxiter=ROOT_MAX_ITER, full_output=True, disp=False)
    if not info.converged:
        raise ConvergenceError(f"Bisection on [{lo}, {hi}] did not converge: {info.flag}.")
    return float(root)


def _first_crossing(grid: np.ndarray, values: np.ndarray, downward: bool, tol=ZERO_TOL):
    """Bracket of the first crossing from above +tol to below -tol (or reverse).

    ``tol`` is a scalar or one threshold per grid point.
    """
    sign = 1.0 if downward else -1.0
    signed = sign * values
    tols = np.broadcast_to(np.asarray(tol, dtype=float), signed.shape)
    last_high = None
    for k, (value, limit) in enumerate(zip(signed, tols)):
        if value > limit:
            last_high = k
        elif value < -limit and last_high is not None:
            return grid[last_high], grid[k]
    return None


def birth_grid(horizon_kappa_t: float = HORIZON_KAPPA_T) -> np.ndarray:
    """Linear grid over (0, horizon] refined geometrically down to BIRTH_GRID_START near the origin."""
    linear = np.linspace(0.0, horizon_kappa_t, GENERAL_GRID_POINTS)
    prefix = np.geomspace(BIRTH_GRID_START, linear[1], BIRTH_PREFIX_POINTS)
    return np.unique(np.concatenate((linear[1:], prefix)))


def general_event_times(
    init: GeneralInitialState, kappa: float, horizon_kappa_t: float = HORIZON_KAPPA_T
) -> EventTimes:
    """Numerical ESD of C_{c1c2} and ESB of C_{r1r2} for an arbitrary initial state.

    The Wootters margin is scanned on a grid over [0, horizon] and each sign
    change is refined by bisection. Births are searched on a grid refined
    geometrically near the origin, since a late death forces an early birth at
    -ln(1 - exp(-kappa t_ESD)) / kappa. A death whose predicted birth lies
    above BIRTH_FLOOR but is not found raises InvariantViolation.
    """
    if not (math.isfinite(kappa) and kappa > 0):
        raise ValueError(f"kappa must be a positive rate, got {kappa}.")
    grid = np.linspace(0.0, horizon_kappa_t, GENERAL_GRID_POINTS)

    def cc(x: float) -> float:
        return _margin_curve(init, (C1, C2), x)

    def rr(x: float) -> float:
        return _margin_curve(init, (R1, R2), x)

    x_esd = None
    cc_values = np.array([cc(x) for x in grid])
    if cc_values[0] > ZERO_TOL:
        bracket = _first_crossing(grid, cc_values, downward=True)
        if bracket is not None:
            logger.debug("ESD bracket %s", bracket)
            x_esd = _find_root(cc, *bracket)

    # near a birth at x_b the r1r2 margin behaves like x * (x - x_b), so thresholds scale with x^2
    fine = birth_grid(horizon_kappa_t)
    rr_values = np.array([rr(x) for x in fine])
    rr_tol = np.minimum(ZERO_TOL, np.maximum(BIRTH_NOISE, BIRTH_REL_TOL * fine**2))
    x_esb = None
    bracket = _first_crossing(fine, rr_values, downward=False, tol=rr_tol)
    if bracket is not None:
        logger.debug("ESB bracket %s", bracket)
        x_esb = _find_root(rr, *bracket)

    if x_esd is not None:
        expected = -math.log(-math.expm1(-x_esd))
        if x_esb is None:
            if expected >= BIRTH_FLOOR:
                raise InvariantViolation(
                    f"ESD at kappa*t = {x_esd:.9f} predicts ESB at {expected:.3e}, but no birth was found."
                )
            logger.warning("Predicted ESB at kappa*t = %.3e is below the resolvable floor %.0e.", expected, BIRTH_FLOOR)
        elif abs(expected - x_esb) > RELATION_TOL:
            raise InvariantViolation(
                f"ESB at kappa*t = {x_esb:.9f} but ESD at {x_esd:.9f} predicts {expected:.9f}."
            )

    return EventTimes(
        esd_c1c2=None if x_esd is None else x_esd / kappa,
        esb_r1r2=None if x_esb is None else x_esb / kappa,
    )


@dataclass(frozen=True)
class ScanRow:
    t: float
    kappa_t: float
    gamma: float
    report: EntanglementReport
    analytic: EntanglementReport

    @property
    def deviation(self) -> float:
        return self.analytic.max_difference(self.report)


def scan_grid(p: EffectiveParams, t_values: Sequence[float], gamma_values: Sequence[float]) -> List[ScanRow]:
    """Oracle report and closed forms at every (gamma, t), gamma-major."""
    t_values = [float(t) for t in t_values]
    gamma_values = [float(g) for g in gamma_values]
    if not t_values or not gamma_values:
        raise ValueError("Scan grids must be nonempty.")
    logger.debug("Scanning %d gamma x %d t points", len(gamma_values), len(t_values))

    rows: List[ScanRow] = []
    for gamma in gamma_values:
        q = p.with_gamma(gamma)
        for t in t_values:
            row = ScanRow(
                t=t,
                kappa_t=q.kappa * t,
                gamma=gamma,
                report=full_report(effective_output_state(q, t)),
                analytic=analytic_report(q, t),
            )
            if row.deviation > AGREEMENT_TOL:
                raise InvariantViolation(
                    f"Closed forms disagree with the state-vector oracle by {row.deviation:.3e} "
                    f"at gamma = {gamma:.6f}, kappa*t = {row.kappa_t:.6f}."
                )
            rows.append(row)
    return rows


def scan_frame(rows: Sequence[ScanRow]) -> pd.DataFrame:
    records = [{"gamma": r.gamma, "kappa_t": r.kappa_t, **r.report.as_dict()} for r in rows]
    return pd.DataFrame(records, columns=["gamma", "kappa_t", *REPORT_FIELDS])


def transfer_summary(p: EffectiveParams, kappa_t_max: float = 6.0, steps: int = 601) -> Dict[str, object]:
    """Headline numbers of the photon -> multipartite -> reservoir transfer at one gamma."""
    t = np.linspace(0.0, kappa_t_max, steps) / p.kappa
    cross = 2.0 * c2_c1r2(p, t)
    block_block = e_bb(p, t)
    flat = plateau(p)
    peak = int(np.argmax(block_block))
    cross_peak = int(np.argmax(cross))
    return {
        "gamma": p.gamma,
        "initial_c2_c1c2": float(c2_cc(p, 0.0)),
        "max_cross_sum": float(cross[cross_peak]),
        "max_cross_sum_kappa_t": float(p.kappa * t[cross_peak]),
        "e_bb_peak": float(block_block[peak]),
        "e_bb_peak_kappa_t": float(p.kappa * t[peak]),
        "has_plateau": flat is not None,
        "plateau_width_kappa_t": None if flat is None else flat.width * p.kappa,
        "asymptotic_c2_r1r2": p.block_concurrence_sq,
    }


def general_scan(init: GeneralInitialState, kappa: float, t_values: Sequence[float]) -> pd.DataFrame:
    """Oracle curves for an arbitrary initial state, with the monogamy slack."""
    if len(t_values) == 0:
        raise ValueError("t_values must be nonempty.")
    records = []
    for t in t_values:
        kappa_t = kappa * float(t)
        state = general_state_from_amplitudes(init, amplitudes_for_kappa_t(kappa_t))
        records.append({"kappa_t": kappa_t, **full_report(state).as_dict(), "monogamy_slack": monogamy_slack(state)})
    return pd.DataFrame(records, columns=["kappa_t", *REPORT_FIELDS, "monogamy_slack"])
