"""Random two-qubit circuits and the distribution of their contextuality.

Gate sets are pinned explicitly:

* ``clifford``   H, S, Sdg, X, Y, Z, CX, CZ, SWAP
* ``clifford_t`` clifford plus T, Tdg
* ``extended``   clifford_t plus RX, RY, RZ, U(theta, phi, lambda), CP(theta)
* ``haar``       a single Haar-random 4x4 unitary per circuit
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import InputError, NegProbError
from .measure import shannon_entropy
from .quantum import QuantumState, contextuality, entanglement_entropy, max_chsh

log = logging.getLogger(__name__)

MAX_CONTEXTUALITY = math.sqrt(2) - 1
ZERO_THRESHOLD = 1e-6
N_BINS = 50
CLUSTER_TOL = 1e-6

_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sdg": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    # two-qubit gates act on (first target, second target) = (control, target)
    "CX": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def _u(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]]
    )


def _cp(t):
    return np.diag([1, 1, 1, np.exp(1j * t)])


def haar_unitary(dim: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix.

    The phases of ``diag(R)`` are pushed into ``Q`` so the result does not
    depend on the QR sign convention.
    """
    if dim not in (2, 4):
        raise InputError("dim must be 2 or 4")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class Gate:
    name: str
    arity: int
    n_params: int = 0
    family: Callable[..., np.ndarray] | None = field(default=None, repr=False, compare=False)

    def matrix(self, params: tuple = ()) -> np.ndarray:
        if self.name == "HAAR":
            return haar_unitary(4, int(params[0]))
        if self.family is not None:
            return np.asarray(self.family(*params), dtype=complex)
        return _FIXED[self.name]


_CLIFFORD = tuple(Gate(n, 1) for n in ("H", "S", "Sdg", "X", "Y", "Z")) + tuple(
    Gate(n, 2) for n in ("CX", "CZ", "SWAP")
)
_T = (Gate("T", 1), Gate("Tdg", 1))
_PARAM = (
    Gate("RX", 1, 1, _rx),
    Gate("RY", 1, 1, _ry),
    Gate("RZ", 1, 1, _rz),
    Gate("U", 1, 3, _u),
    Gate("CP", 2, 1, _cp),
)


@dataclass(frozen=True)
class GateSet:
    name: str
    generators: tuple[Gate, ...]

    @classmethod
    def named(cls, name: str) -> "GateSet":
        sets = {
            "clifford": _CLIFFORD,
            "clifford_t": _CLIFFORD + _T,
            "extended": _CLIFFORD + _T + _PARAM,
            "haar": (Gate("HAAR", 2),),
        }
        if name not in sets:
            raise InputError(f"unknown gate set {name!r}; choose from {', '.join(sets)}")
        return cls(name, sets[name])


GATE_SETS = ("clifford", "clifford_t", "extended", "haar")


class Op(NamedTuple):
    gate: str
    targets: tuple[int, ...]
    params: tuple = ()


@dataclass(frozen=True)
class Circuit:
    depth: int
    ops: tuple[Op, ...]
    seed: int
    gate_set: str = ""


def random_circuit(gates: GateSet, depth: int, seed: int) -> Circuit:
    """``depth`` gates drawn uniformly from ``gates`` with uniform targets."""
    if depth < 0:
        raise InputError("depth must be non-negative")
    rng = np.random.default_rng(seed)
    ops = []
    for _ in range(depth):
        gate = gates.generators[int(rng.integers(len(gates.generators)))]
        if gate.arity == 1:
            targets = (int(rng.integers(2)),)
        else:
            targets = (0, 1) if rng.integers(2) == 0 else (1, 0)
        if gate.name == "HAAR":
            params = (int(rng.integers(2**63 - 1)),)
        else:
            params = tuple(float(x) for x in rng.uniform(0, 2 * math.pi, gate.n_params))
        ops.append(Op(gate.name, targets, params))
    return Circuit(depth, tuple(ops), seed, gates.name)


_GATES_BY_NAME = {g.name: g for g in _CLIFFORD + _T + _PARAM + (Gate("HAAR", 2),)}
_SWAP = _FIXED["SWAP"]


def _full_matrix(op: Op) -> np.ndarray:
    m = _GATES_BY_NAME[op.gate].matrix(op.params)
    if len(op.targets) == 1:
        return np.kron(m, np.eye(2)) if op.targets[0] == 0 else np.kron(np.eye(2), m)
    return m if op.targets == (0, 1) else _SWAP @ m @ _SWAP


def run(circuit: Circuit) -> QuantumState:
    """Apply the ops left to right to ``|00>``."""
    psi = np.array([1, 0, 0, 0], dtype=complex)
    for op in circuit.ops:
        psi = _full_matrix(op) @ psi
    return QuantumState.from_vector(psi)


class Sample(NamedTuple):
    circuit_index: int
    seed: int
    contextuality: float
    chsh: float
    entanglement_entropy: float


@dataclass
class DistributionStats:
    gate_set: str
    samples: np.ndarray
    nonzero_samples: np.ndarray
    bin_edges: np.ndarray
    histogram: np.ndarray
    shannon_entropy: float  # bits over histogram bins
    distinct_values: int
    zero_fraction: float
    max_value: float
    records: list[Sample] = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "gate_set": self.gate_set,
            "n_circuits": int(self.samples.size),
            "shannon_entropy_bits": self.shannon_entropy,
            "zero_fraction": self.zero_fraction,
            "max_contextuality": self.max_value,
            "distinct_clusters": self.distinct_values,
            "nonzero_count": int(self.nonzero_samples.size),
        }


def count_clusters(values: np.ndarray, tol: float = CLUSTER_TOL) -> int:
    """Groups of sorted values whose consecutive gaps are at most ``tol``."""
    if len(values) == 0:
        return 0
    v = np.sort(np.asarray(values))
    return int(1 + np.count_nonzero(np.diff(v) > tol))


def circuit_seeds(seed: int, n_circuits: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_circuits, dtype=np.uint32)]


def _score(args) -> Sample:
    index, circuit_seed, gate_set, depth = args
    gates = GateSet.named(gate_set)
    circuit = random_circuit(gates, 1 if gate_set == "haar" else depth, circuit_seed)
    try:
        state = run(circuit)
        chsh, setting = max_chsh(state)
        value = contextuality(state, setting)
        ent = entanglement_entropy(state)
    except NegProbError as exc:
        raise NegProbError(f"circuit {index} (seed {circuit_seed}) failed: {exc}") from exc
    return Sample(index, circuit_seed, value, chsh, ent)


def summarize(gate_set: str, records: list[Sample]) -> DistributionStats:
    samples = np.array([r.contextuality for r in records])
    nonzero = samples[samples > ZERO_THRESHOLD]
    edges = np.linspace(ZERO_THRESHOLD, MAX_CONTEXTUALITY, N_BINS + 1)
    counts, _ = np.histogram(np.clip(nonzero, ZERO_THRESHOLD, MAX_CONTEXTUALITY), bins=edges)
    probs = counts / counts.sum() if counts.sum() else counts.astype(float)
    return DistributionStats(
        gate_set=gate_set,
        samples=samples,
        nonzero_samples=nonzero,
        bin_edges=edges,
        histogram=probs,
        shannon_entropy=shannon_entropy(probs, base=2),
        distinct_values=count_clusters(samples),
        zero_fraction=float(np.mean(samples <= ZERO_THRESHOLD)) if samples.size else 0.0,
        max_value=float(samples.max()) if samples.size else 0.0,
        records=records,
    )


def experiment(
    gates: GateSet | str,
    n_circuits: int,
    depth: int,
    seed: int,
    workers: int = 1,
) -> DistributionStats:
    """Score ``n_circuits`` random circuits; results are ordered by circuit index."""
    if n_circuits < 1:
        raise InputError("n_circuits must be at least 1")
    name = gates if isinstance(gates, str) else gates.name
    GateSet.named(name)
    if n_circuits * depth > 2_000_000:
        log.warning("large run: %d circuits of depth %d will take a while", n_circuits, depth)
    jobs = [(i, s, name, depth) for i, s in enumerate(circuit_seeds(seed, n_circuits))]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_score, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        records = [_score(j) for j in jobs]
    records.sort(key=lambda r: r.circuit_index)
    return summarize(name, records)
