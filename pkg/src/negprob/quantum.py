"""Two-qubit states, spin observables and CHSH-scenario empirical models.

Qubit 0 is the left tensor factor (party 1), qubit 1 the right (party 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .constraints import build
from .errors import DomainError, InputError
from .l1solver import minimize_l1
from .measure import Variable, shannon_entropy
from .scenario import Context, EmpiricalModel

I2 = np.eye(2, dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True, eq=False)
class QuantumState:
    density: np.ndarray = field(repr=False)
    vector: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        rho = np.array(self.density, dtype=complex)
        if rho.shape != (4, 4):
            raise InputError(f"expected a 4x4 density matrix, got shape {rho.shape}")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise InputError("density matrix must have unit trace")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise InputError("density matrix must be Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise InputError("density matrix must be positive semidefinite")
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    @classmethod
    def from_vector(cls, amplitudes: Sequence[complex]) -> "QuantumState":
        psi = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(psi)
        if psi.shape != (4,) or norm == 0:
            raise InputError("expected 4 amplitudes with nonzero norm")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()), psi)

    @classmethod
    def maximally_mixed(cls) -> "QuantumState":
        return cls(np.eye(4) / 4)

    @property
    def dim(self) -> int:
        return 4

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.density @ self.density)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(self.purity - 1.0) <= tol


def phi_plus() -> QuantumState:
    return QuantumState.from_vector([1, 0, 0, 1])


@dataclass(frozen=True)
class DichotomicObservable:
    """Spin measurement ``n . sigma`` with outcomes +1/-1 on one party."""

    party: int
    direction: tuple[float, float, float]

    def __post_init__(self):
        if self.party not in (1, 2):
            raise InputError("party must be 1 or 2")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or not np.isfinite(d).all() or np.linalg.norm(d) == 0:
            raise InputError("direction must be a nonzero 3-vector")
        object.__setattr__(self, "direction", tuple((d / np.linalg.norm(d)).tolist()))

    @property
    def matrix(self) -> np.ndarray:
        return sum(c * p for c, p in zip(self.direction, PAULI))

    def projector(self, outcome: int) -> np.ndarray:
        """Projector on the eigenspace with eigenvalue ``outcome`` (+1 or -1)."""
        return (I2 + outcome * self.matrix) / 2

    @classmethod
    def in_plane(cls, party: int, angle: float) -> "DichotomicObservable":
        """Direction at ``angle`` radians from Z towards X."""
        return cls(party, (math.sin(angle), 0.0, math.cos(angle)))


@dataclass(frozen=True)
class ChshSetting:
    a: DichotomicObservable
    a_prime: DichotomicObservable
    b: DichotomicObservable
    b_prime: DichotomicObservable

    def __post_init__(self):
        if (self.a.party, self.a_prime.party, self.b.party, self.b_prime.party) != (1, 1, 2, 2):
            raise InputError("a, a' must act on party 1 and b, b' on party 2")


def _two_party(op1: np.ndarray | None, op2: np.ndarray | None) -> np.ndarray:
    return np.kron(I2 if op1 is None else op1, I2 if op2 is None else op2)


def expectation(state: QuantumState, observables: Sequence[DichotomicObservable]) -> float:
    """Born-rule expectation of the product of observables on distinct parties."""
    ops: dict[int, np.ndarray] = {}
    for obs in observables:
        if obs.party in ops:
            raise DomainError("observables on the same party are not jointly measured here")
        ops[obs.party] = obs.matrix
    value = np.trace(state.density @ _two_party(ops.get(1), ops.get(2)))
    return float(value.real)


def chsh_value(state: QuantumState, setting: ChshSetting) -> float:
    e = lambda x, y: expectation(state, [x, y])  # noqa: E731
    s = setting
    return e(s.a, s.b) + e(s.a, s.b_prime) + e(s.a_prime, s.b) - e(s.a_prime, s.b_prime)


def correlation_matrix(state: QuantumState) -> np.ndarray:
    """``T[i, j] = tr(rho sigma_i (x) sigma_j)``."""
    return np.array(
        [[np.trace(state.density @ np.kron(p, q)).real for q in PAULI] for p in PAULI]
    )


def _unit_or(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else fallback


def max_chsh(state: QuantumState) -> tuple[float, ChshSetting]:
    """Largest CHSH value over spin settings, with a setting attaining it.

    With ``u1 >= u2`` the two largest eigenvalues of ``T^T T`` the maximum is
    ``2 sqrt(u1 + u2)``. Bob's settings are ``cos t e1 +/- sin t e2`` in the
    span of the matching eigenvectors, ``tan t = sqrt(u2 / u1)``; Alice
    measures along ``T e1`` and ``T e2``.
    """
    T = correlation_matrix(state)
    u, vecs = np.linalg.eigh(T.T @ T)
    u = np.clip(u, 0.0, None)
    e1, e2 = vecs[:, 2], vecs[:, 1]
    u1, u2 = u[2], u[1]
    value = 2.0 * math.sqrt(u1 + u2)
    t = math.atan2(math.sqrt(u2), math.sqrt(u1))
    b = math.cos(t) * e1 + math.sin(t) * e2
    b_prime = math.cos(t) * e1 - math.sin(t) * e2
    a = _unit_or(T @ e1, np.array([0.0, 0.0, 1.0]))
    a_prime = _unit_or(T @ e2, np.cross(a, [0.0, 1.0, 0.0]) if abs(a[1]) < 0.9 else np.array([1.0, 0.0, 0.0]))
    setting = ChshSetting(
        DichotomicObservable(1, tuple(a)),
        DichotomicObservable(1, tuple(a_prime)),
        DichotomicObservable(2, tuple(b)),
        DichotomicObservable(2, tuple(b_prime)),
    )
    return value, setting


def _joint_table(state, x: DichotomicObservable, y: DichotomicObservable) -> np.ndarray:
    table = np.empty((2, 2))
    for i, s in enumerate((1, -1)):
        for j, t in enumerate((1, -1)):
            table[i, j] = np.trace(state.density @ np.kron(x.projector(s), y.projector(t))).real
    table = np.clip(table, 0.0, None)
    return table / table.sum()


def empirical_model_from_state(state: QuantumState, setting: ChshSetting) -> EmpiricalModel:
    """Bell-scenario model with contexts (a,b), (a,b'), (a',b), (a',b')."""
    names = {"a": setting.a, "a'": setting.a_prime, "b": setting.b, "b'": setting.b_prime}
    variables = tuple(Variable.dichotomic(v) for v in names)
    contexts = tuple(
        Context(f"{x},{y}", (x, y), _joint_table(state, names[x], names[y]))
        for x in ("a", "a'")
        for y in ("b", "b'")
    )
    return EmpiricalModel(variables, contexts)


def contextuality(state: QuantumState, setting: ChshSetting | None = None) -> float:
    """L1 contextuality of the CHSH model (CHSH-optimal setting by default)."""
    if setting is None:
        _, setting = max_chsh(state)
    sol = minimize_l1(build(empirical_model_from_state(state, setting)))
    return sol.contextuality


def cat_state(p: float) -> QuantumState:
    """``sqrt(p)|00> + sqrt(1-p)|11>`` for ``0 <= p <= 1/2``."""
    if not 0.0 <= p <= 0.5:
        raise InputError(f"p must lie in [0, 1/2], got {p}")
    return QuantumState.from_vector([math.sqrt(p), 0, 0, math.sqrt(1 - p)])


def reduced_density(state: QuantumState, party: int = 1) -> np.ndarray:
    rho = state.density.reshape(2, 2, 2, 2)
    return np.einsum("ijkj->ik", rho) if party == 1 else np.einsum("ijil->jl", rho)


def entanglement_entropy(state: QuantumState) -> float:
    """Von Neumann entropy (nats) of either reduced state of a pure state."""
    if not state.is_pure():
        raise DomainError("entanglement entropy is only defined here for pure states")
    schmidt = np.clip(np.linalg.eigvalsh(reduced_density(state)), 0.0, None)
    return shannon_entropy(schmidt)


class SweepRow(NamedTuple):
    p: float
    entanglement_entropy: float
    chsh: float
    contextuality: float


def _sweep_point(p: float) -> SweepRow:
    state = cat_state(p)
    chsh, setting = max_chsh(state)
    return SweepRow(p, entanglement_entropy(state), chsh, contextuality(state, setting))


def cat_sweep(n_points: int, workers: int = 1) -> list[SweepRow]:
    """Entanglement, CHSH and contextuality on a uniform p-grid over [0, 1/2]."""
    if n_points < 2:
        raise InputError("n_points must be at least 2")
    grid = [0.5 * k / (n_points - 1) for k in range(n_points)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_point, grid))
    return [_sweep_point(p) for p in grid]
