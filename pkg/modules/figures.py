from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from modules.dynamics import c2_c1r2, c2_cc, c2_rr, critical_angles, e_bb, scan_grid
from modules.states import EffectiveParams

logger = logging.getLogger(__name__)

FIGURE_IDS = ("1a", "1b", "1c", "1d", "2", "3a", "3b", "4a", "4b", "4c", "4d")

SURFACE_QUANTITIES: Dict[str, str] = {
    "1a": "c2_c1c2",
    "1b": "c2_r1r2",
    "1c": "c2_c1r1",
    "1d": "c2_c1r2",
    "2": "e_bb",
    "3a": "e_qb_c1",
    "3b": "e_qb_r1",
}
CURVE_ANGLES = {"4a": "zero", "4b": "gamma_window", "4c": "gamma_route", "4d": "pi"}

KAPPA_T_MAX = 6.0
SURFACE_T_STEPS = 61
SURFACE_GAMMA_STEPS = 31
CURVE_T_STEPS = 601
CROSS_SCALE = 5.0


def curve_gamma(figure_id: str, p: EffectiveParams) -> float:
    which = CURVE_ANGLES[figure_id]
    if which == "zero":
        return 0.0
    if which == "pi":
        return math.pi
    angle = getattr(critical_angles(p), which)
    if angle is None:
        raise ValueError(f"Figure {figure_id} needs {which}, which does not exist for alpha={p.alpha}, beta={p.beta}.")
    return angle


def _surface(figure_id: str, p: EffectiveParams, kappa_t: np.ndarray, gammas: np.ndarray) -> pd.DataFrame:
    quantity = SURFACE_QUANTITIES[figure_id]
    rows = scan_grid(p, kappa_t / p.kappa, gammas)
    records = [{"gamma": r.gamma, "kappa_t": r.kappa_t, quantity: getattr(r.report, quantity)} for r in rows]
    return pd.DataFrame(records, columns=["gamma", "kappa_t", quantity])


def _curves(figure_id: str, p: EffectiveParams, kappa_t: np.ndarray) -> pd.DataFrame:
    q = p.with_gamma(curve_gamma(figure_id, p))
    t = kappa_t / q.kappa
    cross = 2.0 * np.asarray(c2_c1r2(q, t))
    return pd.DataFrame(
        {
            "gamma": np.full(kappa_t.size, q.gamma),
            "kappa_t": kappa_t,
            "c2_c1c2": np.asarray(c2_cc(q, t)),
            "c2_r1r2": np.asarray(c2_rr(q, t)),
            "c1r2_plus_c2r1": cross,
            "sum_times_5": CROSS_SCALE * cross,
            "e_bb": np.asarray(e_bb(q, t)),
        }
    )


def figure_frame(
    figure_id: str,
    params: Optional[EffectiveParams] = None,
    kappa_t_values: Optional[Sequence[float]] = None,
    gamma_values: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """Table for one figure id; grids default to kappa*t in [0, 6] and gamma in [0, pi]."""
    figure_id = str(figure_id).strip().lower()
    if figure_id not in FIGURE_IDS:
        raise ValueError(f"Unknown figure id '{figure_id}'; expected one of {', '.join(FIGURE_IDS)}.")
    p = params or EffectiveParams.reference()

    if figure_id in CURVE_ANGLES:
        grid = np.linspace(0.0, KAPPA_T_MAX, CURVE_T_STEPS) if kappa_t_values is None else np.asarray(kappa_t_values, float)
        logger.debug("Figure %s: %d curve points", figure_id, grid.size)
        return _curves(figure_id, p, grid)

    grid = np.linspace(0.0, KAPPA_T_MAX, SURFACE_T_STEPS) if kappa_t_values is None else np.asarray(kappa_t_values, float)
    gammas = np.linspace(0.0, math.pi, SURFACE_GAMMA_STEPS) if gamma_values is None else np.asarray(gamma_values, float)
    logger.debug("Figure %s: %d x %d surface", figure_id, gammas.size, grid.size)
    return _surface(figure_id, p, grid, gammas)
