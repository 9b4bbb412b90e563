"""Linear system ``A @ mu = b`` whose solutions reproduce an empirical model.

Columns are the atoms of the product of all variable outcome sets. The first
row is normalisation; every context contributes one indicator row per joint
outcome (its cylinder event), and hidden constraints contribute one row of
outcome-value products.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SignalingError
from .measure import DEFAULT_TOL, OutcomeSpace
from .scenario import EmpiricalModel


class RowLabel(NamedTuple):
    kind: str  # "normalization" | "context" | "hidden"
    source: str  # context id or hidden-constraint members
    assignment: tuple[tuple[str, str], ...] = ()

    def __str__(self):
        if self.kind == "normalization":
            return "normalization"
        if self.kind == "hidden":
            return f"hidden <{self.source}>"
        outcome = ",".join(f"{v}={o}" for v, o in self.assignment)
        return f"context {self.source}: {outcome}"


@dataclass(frozen=True, eq=False)
class ConstraintSystem:
    space: OutcomeSpace
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    row_labels: tuple[RowLabel, ...] = ()
    rows_before_dedup: int = 0

    def __post_init__(self):
        for name in ("matrix", "rhs"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def residual(self, weights: np.ndarray) -> float:
        """Largest absolute constraint violation of ``weights``."""
        return float(np.abs(self.matrix @ np.asarray(weights) - self.rhs).max())

    def drop_rows(self, keep: np.ndarray) -> "ConstraintSystem":
        keep = np.asarray(keep, dtype=bool)
        labels = tuple(l for l, k in zip(self.row_labels, keep) if k)
        return ConstraintSystem(self.space, self.matrix[keep], self.rhs[keep], labels, int(keep.sum()))

    def permute_columns(self, perm: np.ndarray) -> "ConstraintSystem":
        """Same system with atoms reordered; only meaningful for solver checks."""
        return ConstraintSystem(self.space, self.matrix[:, perm], self.rhs, self.row_labels, self.rows_before_dedup)


class RankReport(NamedTuple):
    rank: int
    unknowns: int
    underdetermined: bool


def build(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> ConstraintSystem:
    space = model.space
    rows = [np.ones(space.size)]
    rhs = [1.0]
    labels = [RowLabel("normalization", "")]
    for ctx in model.contexts:
        shape = ctx.table.shape
        for flat, p in enumerate(ctx.table.ravel()):
            outcome = np.unravel_index(flat, shape)
            assignment = dict(zip(ctx.members, (int(o) for o in outcome)))
            rows.append(space.cylinder(assignment).astype(float))
            rhs.append(float(p))
            labels.append(RowLabel(
                "context",
                ctx.id,
                tuple((m, space.variable(m).labels[o]) for m, o in assignment.items()),
            ))
    for hc in model.hidden_constraints:
        rows.append(space.value_product(hc.members))
        rhs.append(hc.expectation)
        labels.append(RowLabel("hidden", "*".join(hc.members)))

    kept_rows, kept_rhs, kept_labels = [], [], []
    seen: dict[bytes, int] = {}
    for row, b, label in zip(rows, rhs, labels):
        key = row.tobytes()
        if key in seen:
            j = seen[key]
            if abs(kept_rhs[j] - b) > tol:
                raise SignalingError(
                    f"{label} and {kept_labels[j]} describe the same event with "
                    f"probabilities {b:.12g} and {kept_rhs[j]:.12g}"
                )
            continue
        seen[key] = len(kept_rows)
        kept_rows.append(row)
        kept_rhs.append(b)
        kept_labels.append(label)
    return ConstraintSystem(
        space, np.vstack(kept_rows), np.array(kept_rhs), tuple(kept_labels), len(rows)
    )


def rank_report(system: ConstraintSystem, tol: float | None = None) -> RankReport:
    rank = int(np.linalg.matrix_rank(system.matrix, tol=tol))
    unknowns = system.matrix.shape[1]
    return RankReport(rank, unknowns, rank < unknowns)


def to_csv(system: ConstraintSystem) -> str:
    """``label, rhs, <one column per atom>`` rows for external solvers."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    atom_names = [
        ";".join(f"{v.id}={v.labels[o]}" for v, o in zip(system.space.variables, atom))
        for atom in system.space.atoms
    ]
    writer.writerow(["row", "rhs", *atom_names])
    for label, b, row in zip(system.row_labels, system.rhs, system.matrix):
        writer.writerow([str(label), repr(float(b)), *(repr(float(x)) for x in row)])
    return buf.getvalue()
