"""Experiment design: correction curves, dent search, candidate scoring.

The linear response model is only approximate; its deviation from the
exact dynamics,

    Delta(dt) = | E_exact(dt) - E_first_order(dt) |,

grows quadratically at small dt and then oscillates.  Informative
interaction times are those where Delta is small: either inside the
contiguous "weak horizon" near dt = 0, or at local minima (dents) that
appear once the dynamics starts oscillating.  This module computes the
curves, locates dents automatically, and scores randomly sampled
parameter sets by the conditioning of their predicted design matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ParameterError
from .estimator import build_row, record_from_run
from .protocol import (
    EPS_ORTH,
    CouplingTensor,
    LocalHamiltonians,
    ProtocolRun,
    RunOutcome,
    first_order_series,
    predict_final_bloch,
    run_protocol_series,
)

T_MAX_DEFAULT = 0.5
DENT_THRESHOLD_DEFAULT = 1e-3
DT_MIN_DEFAULT = 0.02
GRID_STEP_DEFAULT = 1e-3
GRID_STOP_DEFAULT = 0.2


def default_time_grid(
    stop: float = GRID_STOP_DEFAULT, step: float = GRID_STEP_DEFAULT
) -> np.ndarray:
    """Uniform grid over (0, stop] with the given step."""
    if not (step > 0.0 and stop > step):
        raise ParameterError(f"bad grid spec stop={stop} step={step}")
    return np.arange(1, int(round(stop / step)) + 1) * step


@dataclass(frozen=True, eq=False)
class CorrectionCurve:
    """Delta(dt) over a time grid for fixed (r_i, p, q_tilde).

    Points where the post-selection came too close to orthogonal are
    flagged invalid (value NaN) rather than failing the whole curve.
    """

    r_i: np.ndarray
    p: np.ndarray
    q_tilde: np.ndarray
    times: np.ndarray
    values: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True, eq=False)
class DesignCandidate:
    """A set of protocol runs with its design-quality score.

    max_correction is the largest model error Delta at the chosen
    interaction times; condition_number refers to the predicted design
    matrix.  Candidates sort by conditioning.
    """

    runs: tuple[ProtocolRun, ...]
    max_correction: float
    condition_number: float


def _check_grid(times: np.ndarray, t_max: float) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ParameterError("time grid must be 1-d with at least two points")
    if not np.all(np.diff(times) > 0.0):
        raise ParameterError("time grid must be strictly increasing")
    if not (times[0] > 0.0 and times[-1] <= t_max):
        raise ParameterError(f"time grid must lie in (0, {t_max}]")
    return times


def correction_curve(
    r_i,
    p,
    q_tilde,
    g: CouplingTensor,
    locals_: LocalHamiltonians | None = None,
    times: np.ndarray | None = None,
    *,
    t_max: float = T_MAX_DEFAULT,
) -> CorrectionCurve:
    """Pointwise |exact - first-order| expectation over a time grid.

    The model is evaluated with the exact corrected (r_f, q) at each
    grid time, i.e. exactly the quantities an experiment would feed the
    estimator.
    """
    times = _check_grid(default_time_grid() if times is None else times, t_max)
    r_f, q, exact = run_protocol_series(r_i, p, q_tilde, g, locals_, times)
    denom = 1.0 + r_f @ np.asarray(r_i, dtype=float)
    valid = denom >= EPS_ORTH
    values = np.full(times.shape, np.nan)
    if np.any(valid):
        values[valid] = np.abs(
            exact[valid]
            - first_order_series(r_i, r_f[valid], p, q[valid], times[valid], g)
        )
    return CorrectionCurve(
        r_i=np.asarray(r_i, dtype=float),
        p=np.asarray(p, dtype=float),
        q_tilde=np.asarray(q_tilde, dtype=float),
        times=times,
        values=values,
        valid=valid,
    )


def find_dents(
    curve: CorrectionCurve,
    threshold: float = DENT_THRESHOLD_DEFAULT,
    *,
    dt_min: float = DT_MIN_DEFAULT,
) -> list[float]:
    """Times of local minima of Delta below threshold, best first.

    Local minima are grid points strictly below both neighbors; the
    region below dt_min is excluded so selected times carry measurable
    signal.  Returns an empty list when nothing qualifies.
    """
    t, v, ok = curve.times, curve.values, curve.valid
    hits: list[tuple[float, float]] = []
    for i in range(1, len(t) - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        if t[i] >= dt_min and v[i] < threshold and v[i] < v[i - 1] and v[i] < v[i + 1]:
            hits.append((v[i], t[i]))
    hits.sort()
    return [time for _, time in hits]


def weak_horizon(curve: CorrectionCurve, threshold: float) -> float | None:
    """Largest time of the contiguous sub-threshold prefix of the curve.

    The prefix starts at the first grid point; within it the model error
    has stayed below threshold for every earlier time, so halving a time
    keeps the design in the quadratic regime.  Returns None when even
    the first grid point is above threshold.
    """
    below = (curve.values <= threshold) & curve.valid
    if not below[0]:
        return None
    above = np.nonzero(~below)[0]
    idx = (above[0] - 1) if above.size else (len(curve.times) - 1)
    return float(curve.times[idx])


def _delta_at(curve: CorrectionCurve, time: float) -> float:
    idx = int(np.argmin(np.abs(curve.times - time)))
    return float(curve.values[idx])


def assign_time(
    curve: CorrectionCurve,
    threshold: float = DENT_THRESHOLD_DEFAULT,
    *,
    dt_min: float = DT_MIN_DEFAULT,
) -> tuple[float, float]:
    """Choose an interaction time for one run from its correction curve.

    Preference order: the weak-horizon time (largest contiguous
    sub-threshold time, maximal signal while the model stays valid),
    then the best dent, then the global minimum of Delta beyond dt_min.
    Returns (time, Delta at that time).
    """
    horizon = weak_horizon(curve, threshold)
    if horizon is not None:
        return horizon, _delta_at(curve, horizon)
    dents = find_dents(curve, threshold, dt_min=dt_min)
    if dents:
        return dents[0], _delta_at(curve, dents[0])
    sel = np.nonzero((curve.times >= dt_min) & curve.valid)[0]
    if sel.size == 0:
        sel = np.nonzero(curve.valid)[0]
    idx = sel[int(np.argmin(curve.values[sel]))]
    return float(curve.times[idx]), float(curve.values[idx])


def sample_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    """n unit vectors uniform on the sphere."""
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def predicted_design_matrix(
    runs,
    g_prior: CouplingTensor,
    locals_: LocalHamiltonians | None = None,
    *,
    exact: bool = True,
) -> np.ndarray:
    """Design matrix a candidate would produce under the prior tensor.

    With exact=True the final target vectors come from full simulation;
    otherwise from the first-order prediction, which is what remains
    available when the prior is rough.
    """
    rows = np.empty((len(runs), 6))
    for k, run in enumerate(runs):
        if exact:
            r_f, q, exact_val = run_protocol_series(
                run.r_i, run.p, run.q_tilde, g_prior, locals_, np.array([run.dt])
            )
            outcome = RunOutcome(
                r_f=r_f[0], q=q[0], expectation=float(exact_val[0]), phi2=None
            )
        else:
            outcome = RunOutcome(
                r_f=predict_final_bloch(run.r_i, run.p, g_prior, run.dt),
                q=run.q_tilde,
                expectation=0.0,
                phi2=None,
            )
        rows[k] = build_row(record_from_run(run, outcome))
    return rows


def sample_designs(
    seed: int,
    g_prior: CouplingTensor,
    n: int,
    *,
    n_runs: int = 6,
    times: np.ndarray | None = None,
    threshold: float = DENT_THRESHOLD_DEFAULT,
    dt_min: float = DT_MIN_DEFAULT,
    locals_: LocalHamiltonians | None = None,
    exact: bool = True,
) -> list[DesignCandidate]:
    """Sample n candidate parameter sets and score them, best first.

    Each candidate holds n_runs (r_i, p, q_tilde) triples drawn uniform
    on the sphere, with interaction times assigned per run from the
    correction curve under the prior tensor (see assign_time).  The
    returned list is sorted by condition number of the predicted design
    matrix, so rank-deficient candidates (condition number infinite)
    sort last.  Deterministic for a fixed seed.
    """
    if n < 1:
        raise ParameterError(f"need at least one candidate, got {n}")
    rng = np.random.default_rng(seed)
    grid = default_time_grid() if times is None else np.asarray(times, dtype=float)
    out: list[DesignCandidate] = []
    for _ in range(n):
        runs = []
        max_delta = 0.0
        for _ in range(n_runs):
            r_i, p, q = sample_unit_vectors(rng, 3)
            curve = correction_curve(r_i, p, q, g_prior, locals_, grid)
            dt, delta = assign_time(curve, threshold, dt_min=dt_min)
            max_delta = max(max_delta, delta)
            runs.append(ProtocolRun(r_i=r_i, p=p, q_tilde=q, dt=dt))
        a = predicted_design_matrix(runs, g_prior, locals_, exact=exact)
        condition = float(np.linalg.cond(a))
        out.append(
            DesignCandidate(
                runs=tuple(runs),
                max_correction=max_delta,
                condition_number=condition,
            )
        )
    out.sort(key=lambda c: (not np.isfinite(c.condition_number), c.condition_number))
    return out
