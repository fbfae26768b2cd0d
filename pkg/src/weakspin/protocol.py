"""Forward simulation of the weak spin-coupling measurement protocol.

A target spin prepared in Bloch state r_i and a probe spin prepared in
p interact for a short time dt under

    H_tot = H_t (x) I + I (x) H_p + sum_{mu,nu} g[mu,nu] sigma_mu (x) sigma_nu

with a symmetric coupling tensor g (rad/us, numerically equal to the
coupling strengths in MHz).  After the exact evolution

    Phi2 = exp(-i H_tot dt) Phi1 exp(+i H_tot dt),   Phi1 = rho_t (x) rho_p,

the target's reduced state is read out (ideal tomography) and the probe
is measured along a unit axis q_tilde.  The known single-spin dynamics
is then removed by conjugating the target state and the measurement
axis with exp(+i H_t dt) / exp(+i H_p dt), yielding the corrected pair
(r_f, q) that enters the linear response model.

To first order in dt the measured probe expectation is

    E(q.sigma_p) ~ q.p + sum_mu 2 dt [ {(q x n_mu).p} (r_i + r_f)_mu
                   + {n_mu.q - (n_mu.p)(q.p)} (r_i x r_f)_mu ] / (1 + r_i.r_f)

where n_mu is the mu-th column of g.  The bracketed combination is the
real/imaginary split of the spin weak value
(r_i + r_f + i r_i x r_f)/(1 + r_i.r_f), which diverges for orthogonal
pre/post-selection; operations guard the denominator with EPS_ORTH.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    BLOCH_NORM_ATOL,
    IDENTITY_2,
    PAULIS,
    DimensionMismatchError,
    InvalidStateError,
    ParameterError,
    bloch_to_density,
    density_to_bloch,
    herm_exp,
    is_hermitian,
    partial_trace,
    pauli_dot,
    tensor_product,
)

# Packing order of the six independent components of a symmetric tensor.
OMEGA = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
OMEGA_LABELS = ("xx", "yy", "zz", "xy", "xz", "yz")

# Reject post-selections with 1 + r_i.r_f below this: the response model
# diverges and the corresponding estimator rows blow up.
EPS_ORTH = 1e-6


class OrthogonalPostSelectionError(ValueError):
    """Post-selection too close to orthogonal for the response model."""


def _as_vec3(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DimensionMismatchError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidStateError(f"{name} has non-finite components")
    v = v.copy()
    v.flags.writeable = False
    return v


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """Symmetric 3x3 spin-spin coupling tensor, stored as 6 components.

    values holds (g_xx, g_yy, g_zz, g_xy, g_xz, g_yz) in MHz under the
    convention that the numbers are used directly as angular frequencies
    in rad/us.  The full matrix is materialized on demand.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (6,):
            raise DimensionMismatchError(
                f"expected 6 components {OMEGA_LABELS}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidStateError("coupling components must be finite")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> "CouplingTensor":
        return cls(np.zeros(6))

    @classmethod
    def from_matrix(cls, matrix, atol: float = 1e-12) -> "CouplingTensor":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (3, 3):
            raise DimensionMismatchError(f"expected 3x3, got shape {matrix.shape}")
        if np.max(np.abs(matrix - matrix.T)) > atol:
            raise InvalidStateError("coupling matrix is not symmetric")
        return cls(np.array([matrix[a, b] for a, b in OMEGA]))

    @property
    def matrix(self) -> np.ndarray:
        m = np.zeros((3, 3))
        for j, (a, b) in enumerate(OMEGA):
            m[a, b] = m[b, a] = self.values[j]
        return m

    def column(self, mu: int) -> np.ndarray:
        """Column n_mu of the tensor (equal to row mu by symmetry)."""
        return self.matrix[:, mu]

    def scaled(self, factor: float) -> "CouplingTensor":
        return CouplingTensor(self.values * factor)


@dataclass(frozen=True, eq=False)
class LocalHamiltonians:
    """Known single-spin Hamiltonians of target and probe, in rad/us."""

    h_target: np.ndarray
    h_probe: np.ndarray

    def __post_init__(self):
        for name in ("h_target", "h_probe"):
            h = np.asarray(getattr(self, name), dtype=complex)
            if h.shape != (2, 2):
                raise DimensionMismatchError(f"{name} must be 2x2, got {h.shape}")
            if not is_hermitian(h):
                raise InvalidStateError(f"{name} is not Hermitian")
            h = h.copy()
            h.flags.writeable = False
            object.__setattr__(self, name, h)

    @classmethod
    def zero(cls) -> "LocalHamiltonians":
        return cls(np.zeros((2, 2)), np.zeros((2, 2)))

    @classmethod
    def from_fields(cls, target=(0.0, 0.0, 0.0), probe=(0.0, 0.0, 0.0)) -> "LocalHamiltonians":
        """Build h.sigma Hamiltonians from effective field 3-vectors."""
        return cls(pauli_dot(target), pauli_dot(probe))

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.h_target) or np.any(self.h_probe))


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    """Controlled parameters of one protocol execution.

    r_i and p are the target/probe preparation Bloch vectors (norm <= 1),
    q_tilde the unit measurement axis in the lab frame, dt the
    interaction time in us.
    """

    r_i: np.ndarray
    p: np.ndarray
    q_tilde: np.ndarray
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "r_i", _as_vec3(self.r_i, "r_i"))
        object.__setattr__(self, "p", _as_vec3(self.p, "p"))
        object.__setattr__(self, "q_tilde", _as_vec3(self.q_tilde, "q_tilde"))
        object.__setattr__(self, "dt", float(self.dt))
        for name in ("r_i", "p"):
            norm = np.linalg.norm(getattr(self, name))
            if norm > 1.0 + BLOCH_NORM_ATOL:
                raise InvalidStateError(f"{name} norm {norm} exceeds 1")
        q_norm = np.linalg.norm(self.q_tilde)
        if abs(q_norm - 1.0) > BLOCH_NORM_ATOL:
            raise InvalidStateError(f"q_tilde norm {q_norm} is not 1")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True, eq=False)
class RunOutcome:
    """Measured data of one run, after local-dynamics removal.

    r_f is the corrected post-selected target Bloch vector, q the
    corrected measurement axis, expectation the measured probe value
    E(q.sigma_p), and phi2 the exact evolved two-spin state.
    """

    r_f: np.ndarray
    q: np.ndarray
    expectation: float
    phi2: np.ndarray = field(repr=False)


def build_interaction(g: CouplingTensor) -> np.ndarray:
    """Assemble the 4x4 interaction sum_{mu,nu} g[mu,nu] sigma_mu (x) sigma_nu."""
    m = g.matrix
    h = np.zeros((4, 4), dtype=complex)
    for mu in range(3):
        for nu in range(3):
            if m[mu, nu] != 0.0:
                h += m[mu, nu] * tensor_product(PAULIS[mu], PAULIS[nu])
    return h


def total_hamiltonian(g: CouplingTensor, locals_: LocalHamiltonians | None = None) -> np.ndarray:
    """Two-spin generator: local target + local probe + interaction."""
    h = build_interaction(g)
    if locals_ is not None and not locals_.is_zero:
        h = h + tensor_product(locals_.h_target, IDENTITY_2)
        h = h + tensor_product(IDENTITY_2, locals_.h_probe)
    return h


def evolve_pair(
    phi1: np.ndarray,
    g: CouplingTensor,
    locals_: LocalHamiltonians | None,
    dt: float,
) -> np.ndarray:
    """Exact conjugation Phi2 = U Phi1 U^dag with U = exp(-i H_tot dt)."""
    phi1 = np.asarray(phi1, dtype=complex)
    if phi1.shape != (4, 4):
        raise DimensionMismatchError(f"expected 4x4 state, got shape {phi1.shape}")
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    u = herm_exp(total_hamiltonian(g, locals_), dt)
    return u @ phi1 @ u.conj().T


# Convenience wrappers with the fixed keep-flag spelled in the name.
def partial_trace_target(rho: np.ndarray) -> np.ndarray:
    return partial_trace(rho, "target")


def partial_trace_probe(rho: np.ndarray) -> np.ndarray:
    return partial_trace(rho, "probe")


def run_protocol(
    run: ProtocolRun,
    g: CouplingTensor,
    locals_: LocalHamiltonians | None = None,
) -> RunOutcome:
    """Execute preparation, entangling evolution, readout and correction.

    The probe expectation is measured along the lab axis q_tilde; the
    returned (r_f, q) are the post-selected target state and measurement
    axis with the known single-spin rotations undone, so they feed the
    response model directly.  With zero local Hamiltonians q == q_tilde
    and r_f is the raw tomography result.
    """
    phi1 = tensor_product(bloch_to_density(run.r_i), bloch_to_density(run.p))
    phi2 = evolve_pair(phi1, g, locals_, run.dt)
    rho_t = partial_trace_target(phi2)
    rho_p = partial_trace_probe(phi2)
    exp_val = float(np.trace(pauli_dot(run.q_tilde) @ rho_p).real)

    if locals_ is None or locals_.is_zero:
        r_f = density_to_bloch(rho_t)
        q = run.q_tilde.copy()
    else:
        undo_t = herm_exp(locals_.h_target, -run.dt)  # exp(+i H_t dt)
        undo_p = herm_exp(locals_.h_probe, -run.dt)
        r_f = density_to_bloch(undo_t @ rho_t @ undo_t.conj().T)
        q = density_to_bloch(undo_p @ pauli_dot(run.q_tilde) @ undo_p.conj().T) / 2.0
    return RunOutcome(r_f=r_f, q=q, expectation=exp_val, phi2=phi2)


def run_protocol_series(
    r_i,
    p,
    q_tilde,
    g: CouplingTensor,
    locals_: LocalHamiltonians | None,
    times,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized protocol over a grid of interaction times.

    Shares one eigendecomposition of H_tot across the whole grid, which
    makes dense time scans (correction curves, design search) cheap.
    Returns (r_f[n,3], q[n,3], expectation[n]) with the same correction
    semantics as run_protocol.
    """
    r_i = _as_vec3(r_i, "r_i")
    p = _as_vec3(p, "p")
    q_tilde = _as_vec3(q_tilde, "q_tilde")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ParameterError("times must be a non-empty 1-d array")
    if not np.all(times > 0.0):
        raise ParameterError("all times must be positive")

    phi1 = tensor_product(bloch_to_density(r_i), bloch_to_density(p))
    w, v = np.linalg.eigh(total_hamiltonian(g, locals_))
    phi1_eig = v.conj().T @ phi1 @ v
    phases = np.exp(-1j * np.subtract.outer(w, w)[None] * times[:, None, None])
    phi2 = np.einsum("ab,tbc,dc->tad", v, phases * phi1_eig[None], v.conj(), optimize=True)

    r4 = phi2.reshape(-1, 2, 2, 2, 2)
    rho_t = np.einsum("tipjp->tij", r4)
    rho_p = np.einsum("tipiq->tpq", r4)
    exp_vals = np.einsum("tij,ji->t", rho_p, pauli_dot(q_tilde)).real

    if locals_ is None or locals_.is_zero:
        r_f = np.einsum("tij,aji->ta", rho_t, PAULIS).real
        q = np.broadcast_to(q_tilde, (times.size, 3)).copy()
    else:
        r_f = np.empty((times.size, 3))
        q = np.empty((times.size, 3))
        proj = pauli_dot(q_tilde)
        for k, t in enumerate(times):
            undo_t = herm_exp(locals_.h_target, -t)
            undo_p = herm_exp(locals_.h_probe, -t)
            r_f[k] = density_to_bloch(undo_t @ rho_t[k] @ undo_t.conj().T)
            q[k] = density_to_bloch(undo_p @ proj @ undo_p.conj().T) / 2.0
    return r_f, q, exp_vals


def weak_value_sigma(r_i, r_f) -> np.ndarray:
    """Spin weak value (r_i + r_f + i r_i x r_f)/(1 + r_i.r_f).

    For pure states this equals <f|sigma|i>/<f|i>; the real part is
    symmetric and the imaginary part antisymmetric under swapping the
    pre- and post-selected vectors.
    """
    r_i = _as_vec3(r_i, "r_i")
    r_f = _as_vec3(r_f, "r_f")
    denom = 1.0 + float(np.dot(r_i, r_f))
    if denom < EPS_ORTH:
        raise OrthogonalPostSelectionError(
            f"1 + r_i.r_f = {denom} is below {EPS_ORTH}; post-selection too close"
            " to orthogonal"
        )
    return (r_i + r_f + 1j * np.cross(r_i, r_f)) / denom


def first_order_expectation(r_i, r_f, p, q, dt: float, g: CouplingTensor) -> float:
    """Linear response model for the corrected probe expectation.

    Evaluates q.p plus the weak-value correction linear in the coupling
    tensor; reduces to q.p at g = 0 and matches the exact dynamics to
    first order in dt for pure pre-selected states.
    """
    return float(
        first_order_series(
            r_i,
            np.asarray(r_f, dtype=float)[None, :],
            p,
            np.asarray(q, dtype=float)[None, :],
            np.array([dt], dtype=float),
            g,
        )[0]
    )


def first_order_series(r_i, r_f, p, q, times, g: CouplingTensor) -> np.ndarray:
    """Vectorized first_order_expectation over per-time (r_f, q) arrays."""
    r_i = _as_vec3(r_i, "r_i")
    p = _as_vec3(p, "p")
    r_f = np.asarray(r_f, dtype=float).reshape(-1, 3)
    q = np.asarray(q, dtype=float).reshape(-1, 3)
    times = np.asarray(times, dtype=float).reshape(-1)

    denom = 1.0 + r_f @ r_i
    if np.any(denom < EPS_ORTH):
        raise OrthogonalPostSelectionError(
            "1 + r_i.r_f dropped below the orthogonality guard on the grid"
        )
    qp = q @ p
    cross_if = np.cross(np.broadcast_to(r_i, r_f.shape), r_f)
    total = qp.copy()
    m = g.matrix
    for mu in range(3):
        n = m[:, mu]
        term1 = np.cross(q, np.broadcast_to(n, q.shape)).dot(p) * (r_i[mu] + r_f[:, mu])
        term2 = (q @ n - (p @ n) * qp) * cross_if[:, mu]
        total = total + 2.0 * times * (term1 + term2) / denom
    return total


def predict_final_bloch(r_i, p, g: CouplingTensor, dt: float) -> np.ndarray:
    """First-order prediction of the post-selected target vector.

    r_f ~ r_i + 2 dt (g p) x r_i; used to predict design matrices when
    only a rough prior for the coupling is available.
    """
    r_i = _as_vec3(r_i, "r_i")
    p = _as_vec3(p, "p")
    return r_i + 2.0 * dt * np.cross(g.matrix @ p, r_i)
