"""Linear inversion of measured protocol records into a coupling tensor.

Each record contributes one equation.  With D = 1 + r_i.r_f the scaled
signal

    zeta = (E(q.sigma_p) - q.p) * D / (2 dt)

is, to first order, a linear functional of the six independent tensor
components xi = (g_xx, g_yy, g_zz, g_xy, g_xz, g_yz):

    zeta = sum_j A_j xi_j,
    A via C[a,b] = (p x q)_a (r_i + r_f)_b + {q - p (q.p)}_a (r_i x r_f)_b,

where diagonal components take C[mu,mu] and off-diagonal ones the
symmetrized sum C[mu,nu] + C[nu,mu], because a symmetric tensor feeds
both index placements of the response.  Six independent records give a
square solve; more give least squares.  The row coefficients equal the
partial derivatives of the response model with respect to the stored
tensor components, which the test suite checks by central differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidStateError
from .protocol import (
    EPS_ORTH,
    OMEGA,
    CouplingTensor,
    ProtocolRun,
    RunOutcome,
    _as_vec3,
)

KAPPA_MAX_DEFAULT = 1e8


class InvalidRecordError(InvalidStateError):
    """Record violates an invariant and must not enter the system."""


class InsufficientDataError(ValueError):
    """Fewer records than unknown tensor components."""


class IllConditionedDesignError(RuntimeError):
    """Design matrix condition number exceeds the configured cap."""

    def __init__(self, condition_number: float, kappa_max: float):
        self.condition_number = condition_number
        self.kappa_max = kappa_max
        super().__init__(
            f"design matrix condition number {condition_number:.3e} exceeds"
            f" cap {kappa_max:.1e}"
        )


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    """One protocol run's controlled parameters and measured outcomes."""

    r_i: np.ndarray
    r_f: np.ndarray
    p: np.ndarray
    q: np.ndarray
    dt: float
    expectation: float

    def __post_init__(self):
        for name in ("r_i", "r_f", "p", "q"):
            object.__setattr__(self, name, _as_vec3(getattr(self, name), name))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "expectation", float(self.expectation))
        denom = 1.0 + float(np.dot(self.r_i, self.r_f))
        if denom < EPS_ORTH:
            raise InvalidRecordError(
                f"1 + r_i.r_f = {denom} is below the orthogonality guard"
            )
        if not self.dt > 0.0:
            raise InvalidRecordError(f"dt must be positive, got {self.dt}")
        if abs(self.expectation) > 1.0 + 1e-9:
            raise InvalidRecordError(
                f"expectation {self.expectation} outside [-1, 1]"
            )


@dataclass(frozen=True, eq=False)
class EstimationResult:
    """Recovered tensor plus diagnostics of the solve."""

    g_est: CouplingTensor
    condition_number: float
    residual_norm: float
    error_stats: tuple[float, float] | None = None


def record_from_run(run: ProtocolRun, outcome: RunOutcome) -> ExperimentRecord:
    """Pack a forward-simulated run and its outcome into a record."""
    return ExperimentRecord(
        r_i=run.r_i,
        r_f=outcome.r_f,
        p=run.p,
        q=outcome.q,
        dt=run.dt,
        expectation=outcome.expectation,
    )


def build_row(rec: ExperimentRecord) -> np.ndarray:
    """Sensitivity row mapping the six tensor components to zeta."""
    c = np.outer(np.cross(rec.p, rec.q), rec.r_i + rec.r_f)
    c += np.outer(rec.q - rec.p * np.dot(rec.q, rec.p), np.cross(rec.r_i, rec.r_f))
    return np.array([c[a, b] if a == b else c[a, b] + c[b, a] for a, b in OMEGA])


def build_system(records) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the k x 6 design matrix and scaled-signal vector."""
    records = list(records)
    if len(records) < 6:
        raise InsufficientDataError(
            f"need at least 6 records, got {len(records)}"
        )
    a = np.empty((len(records), 6))
    zeta = np.empty(len(records))
    for k, rec in enumerate(records):
        a[k] = build_row(rec)
        denom = 1.0 + np.dot(rec.r_i, rec.r_f)
        zeta[k] = (rec.expectation - np.dot(rec.q, rec.p)) * denom / (2.0 * rec.dt)
    return a, zeta


def solve(
    a: np.ndarray,
    zeta: np.ndarray,
    *,
    kappa_max: float = KAPPA_MAX_DEFAULT,
    g_true: CouplingTensor | None = None,
) -> EstimationResult:
    """Invert the linear system into a symmetric coupling tensor.

    Square systems are solved directly, overdetermined ones by least
    squares (duplicating consistent rows leaves the solution unchanged).
    Raises IllConditionedDesignError instead of silently returning a
    near-singular solve.
    """
    a = np.asarray(a, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if a.ndim != 2 or a.shape[1] != 6 or a.shape[0] != zeta.shape[0]:
        raise ValueError(f"incompatible system shapes {a.shape} and {zeta.shape}")
    condition = float(np.linalg.cond(a))
    if not np.isfinite(condition) or condition > kappa_max:
        raise IllConditionedDesignError(condition, kappa_max)
    if a.shape[0] == 6:
        xi = np.linalg.solve(a, zeta)
    else:
        xi, *_ = np.linalg.lstsq(a, zeta, rcond=None)
    residual = float(np.linalg.norm(a @ xi - zeta))
    g_est = CouplingTensor(xi)
    stats = error_stats(g_true, g_est) if g_true is not None else None
    return EstimationResult(
        g_est=g_est,
        condition_number=condition,
        residual_norm=residual,
        error_stats=stats,
    )


def estimate_tensor(
    records,
    *,
    kappa_max: float = KAPPA_MAX_DEFAULT,
    g_true: CouplingTensor | None = None,
) -> EstimationResult:
    """build_system followed by solve."""
    a, zeta = build_system(records)
    return solve(a, zeta, kappa_max=kappa_max, g_true=g_true)


def error_stats(g_true: CouplingTensor, g_est: CouplingTensor) -> tuple[float, float]:
    """Mean and sample standard deviation of the six component errors.

    The standard deviation uses divisor 5 (one fewer than the number of
    independent components).
    """
    diff = g_est.values - g_true.values
    mean = float(diff.mean())
    std = float(np.sqrt(((diff - mean) ** 2).sum() / (diff.size - 1)))
    return mean, std
