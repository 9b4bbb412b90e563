"""Finite signed measures with distinguished context sub-algebras.

All spaces are finite products of outcome sets. Sigma-algebras are never
materialised: the global algebra is the power set of the atoms and a context
algebra is the cylinder algebra generated by fixing the outcomes of its member
variables. Atoms are ordered lexicographically in variable order, which is the
C-order flattening of an array with one axis per variable.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InputError

DEFAULT_TOL = 1e-9

Atom = tuple[int, ...]


@dataclass(frozen=True)
class Variable:
    """A random variable with a finite list of labelled numeric outcomes."""

    id: str
    labels: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        if len(self.labels) < 2:
            raise InputError(f"variable {self.id!r} needs at least 2 outcomes")
        if len(self.labels) != len(self.values):
            raise InputError(f"variable {self.id!r}: labels and values differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise InputError(f"variable {self.id!r}: duplicate outcome labels")

    @classmethod
    def dichotomic(cls, id: str) -> "Variable":
        return cls(id, ("+", "-"), (1.0, -1.0))

    @property
    def n_outcomes(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class OutcomeSpace:
    """Cartesian product of the outcome sets of ``variables``."""

    variables: tuple[Variable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise InputError("outcome space needs at least one variable")
        ids = [v.id for v in self.variables]
        if len(set(ids)) != len(ids):
            raise InputError(f"duplicate variable ids in {ids}")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.n_outcomes for v in self.variables)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(itertools.product(*(range(k) for k in self.shape)))

    def index_of(self, var_id: str) -> int:
        try:
            return self.ids.index(var_id)
        except ValueError:
            raise InputError(f"unknown variable {var_id!r}") from None

    def variable(self, var_id: str) -> Variable:
        return self.variables[self.index_of(var_id)]

    def atom_index(self, atom: Sequence[int]) -> int:
        atom = tuple(atom)
        if len(atom) != len(self.shape) or any(
            not (0 <= a < k) for a, k in zip(atom, self.shape)
        ):
            raise InputError(f"atom {atom} does not belong to the space {self.ids}")
        return int(np.ravel_multi_index(atom, self.shape))

    def cylinder(self, assignment: dict[str, int]) -> np.ndarray:
        """Boolean mask over atoms of the event fixing ``assignment``."""
        grid = np.ones(self.shape, dtype=bool)
        for var_id, outcome in assignment.items():
            axis = self.index_of(var_id)
            sel = np.zeros(self.shape[axis], dtype=bool)
            sel[outcome] = True
            view = [1] * len(self.shape)
            view[axis] = self.shape[axis]
            grid &= sel.reshape(view)
        return grid.ravel()

    def value_product(self, var_ids: Iterable[str]) -> np.ndarray:
        """Product of the numeric outcome values of ``var_ids`` at every atom."""
        out = np.ones(self.shape)
        for var_id in var_ids:
            axis = self.index_of(var_id)
            view = [1] * len(self.shape)
            view[axis] = self.shape[axis]
            out = out * np.asarray(self.variables[axis].values).reshape(view)
        return out.ravel()

    def subspace(self, keep: Iterable[str]) -> "OutcomeSpace":
        keep = set(keep)
        return OutcomeSpace(tuple(v for v in self.variables if v.id in keep))


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Real mass on every atom of a finite outcome space."""

    space: OutcomeSpace
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size != self.space.size:
            raise InputError(
                f"expected {self.space.size} weights for space {self.space.ids}, got {w.size}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, space: OutcomeSpace) -> "SignedMeasure":
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point_mass(cls, space: OutcomeSpace, atom: Sequence[int]) -> "SignedMeasure":
        w = np.zeros(space.size)
        w[space.atom_index(atom)] = 1.0
        return cls(space, w)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def as_tensor(self) -> np.ndarray:
        return self.weights.reshape(self.space.shape)

    def items(self):
        """Yield ``(atom, weight)`` pairs in canonical order."""
        return zip(self.space.atoms, self.weights.tolist())


@dataclass(frozen=True)
class ContextAlgebra:
    """Cylinder sub-algebra generated by the outcomes of ``members``."""

    space: OutcomeSpace
    members: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InputError("context needs at least one member variable")
        if len(set(self.members)) != len(self.members):
            raise InputError(f"duplicate members in context {self.members}")
        for m in self.members:
            self.space.index_of(m)

    def assignments(self):
        """Every full outcome assignment to the members, in canonical order."""
        shape = [self.space.variable(m).n_outcomes for m in self.members]
        for combo in itertools.product(*(range(k) for k in shape)):
            yield dict(zip(self.members, combo))

    def atom_events(self):
        """Yield ``(assignment, mask)`` for each atom of the context algebra."""
        for assignment in self.assignments():
            yield assignment, self.space.cylinder(assignment)


@dataclass
class KolmogorovReport:
    """Outcome of checking that a restriction is a probability measure."""

    ok: bool
    total: float
    violations: list[tuple[dict[str, int], float]]

    def __bool__(self):
        return self.ok


def evaluate(measure: SignedMeasure, event: Iterable[Sequence[int]]) -> float:
    """Measure of a set of atoms.

    Additivity holds by construction: the value is the sum of the weights of
    the distinct atoms in ``event``.
    """
    idx = {measure.space.atom_index(a) for a in event}
    return float(sum(measure.weights[i] for i in sorted(idx)))


def total_variation(measure: SignedMeasure) -> float:
    """Total variation norm ``sum |mu(w)|``.

    On a finite space the supremum of ``mu(A) - mu(B)`` is reached with ``A``
    the positive atoms and ``B`` the negative ones, which gives exactly the
    sum of absolute weights.
    """
    return float(np.abs(measure.weights).sum())


def marginalize(measure: SignedMeasure, keep: Iterable[str]) -> SignedMeasure:
    """Push-forward of ``measure`` along the projection onto ``keep``."""
    keep = list(keep)
    if not keep:
        raise InputError("keep must name at least one variable")
    axes = {measure.space.index_of(k) for k in keep}
    drop = tuple(i for i in range(len(measure.space.shape)) if i not in axes)
    reduced = measure.as_tensor().sum(axis=drop) if drop else measure.as_tensor()
    return SignedMeasure(measure.space.subspace(keep), reduced.ravel())


def context_distribution(measure: SignedMeasure, context: ContextAlgebra) -> np.ndarray:
    """Masses of the context atoms, ordered by ``context.members``."""
    marg = marginalize(measure, context.members)
    # the marginal keeps space order; bring axes into member order
    order = [marg.space.ids.index(m) for m in context.members]
    return np.transpose(marg.as_tensor(), order).ravel()


def restrict_is_kolmogorovian(
    measure: SignedMeasure, context: ContextAlgebra, tol: float = DEFAULT_TOL
) -> KolmogorovReport:
    if context.space != measure.space:
        raise InputError("context and measure live on different spaces")
    probs = context_distribution(measure, context)
    violations = [
        (assignment, float(p))
        for assignment, p in zip(context.assignments(), probs)
        if p < -tol
    ]
    total = float(probs.sum())
    ok = not violations and abs(total - 1.0) <= tol
    return KolmogorovReport(ok, total, violations)


def shannon_entropy(probs: Iterable[float], base: float = math.e) -> float:
    p = np.asarray(list(probs), dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum() / math.log(base)) + 0.0


def context_entropy(
    measure: SignedMeasure,
    contexts: Sequence[ContextAlgebra],
    tol: float = DEFAULT_TOL,
) -> float:
    """Smallest Shannon entropy (nats) over the given context restrictions."""
    if not contexts:
        raise InputError("need at least one context")
    best = math.inf
    for ctx in contexts:
        if not restrict_is_kolmogorovian(measure, ctx, tol):
            raise DomainError(f"restriction to context {ctx.members} is not a probability")
        probs = np.clip(context_distribution(measure, ctx), 0.0, None)
        best = min(best, shannon_entropy(probs))
    return best
