"""Empirical models: variables, measurement contexts and their joint tables.

A model is read from (and written to) a small JSON document::

    {
      "variables": [{"id": "a", "outcomes": [{"label": "+", "value": 1},
                                             {"label": "-", "value": -1}]}, ...],
      "contexts": [{"id": "a,a'", "members": ["a", "a'"],
                    "table": {"order": ["a", "a'"], "probs": [0.5, 0, 0, 0.5]}}, ...],
      "hidden_constraints": [{"members": ["X", "Y", "Z"], "expectation": 1.0}]
    }

``probs`` is row-major over ``order`` with the last variable varying fastest.
Variables with the same id are the same random variable in every context.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import InputError, ScenarioError
from .measure import DEFAULT_TOL, OutcomeSpace, Variable

BUILTINS = ("bell", "pr_box", "mermin", "three_dichotomic")


@dataclass(frozen=True, eq=False)
class Context:
    id: str
    members: tuple[str, ...]
    table: np.ndarray = field(repr=False)  # one axis per member, in member order

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        t = np.array(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __eq__(self, other):
        return (
            isinstance(other, Context)
            and self.id == other.id
            and self.members == other.members
            and self.table.shape == other.table.shape
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None

    def marginal(self, keep: Sequence[str]) -> np.ndarray:
        """Table summed down to ``keep`` (axes in ``keep`` order)."""
        drop = tuple(i for i, m in enumerate(self.members) if m not in keep)
        reduced = self.table.sum(axis=drop) if drop else self.table
        remaining = [m for m in self.members if m in keep]
        return np.transpose(reduced, [remaining.index(k) for k in keep])


@dataclass(frozen=True)
class HiddenConstraint:
    """Prescribed expectation of a product of variables no context measures."""

    members: tuple[str, ...]
    expectation: float

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "expectation", float(self.expectation))


@dataclass(frozen=True)
class EmpiricalModel:
    variables: tuple[Variable, ...]
    contexts: tuple[Context, ...]
    hidden_constraints: tuple[HiddenConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "hidden_constraints", tuple(self.hidden_constraints))

    @property
    def space(self) -> OutcomeSpace:
        return OutcomeSpace(self.variables)

    def variable(self, var_id: str) -> Variable:
        for v in self.variables:
            if v.id == var_id:
                return v
        raise InputError(f"unknown variable {var_id!r}")

    def context(self, ctx_id: str) -> Context:
        for c in self.contexts:
            if c.id == ctx_id:
                return c
        raise InputError(f"unknown context {ctx_id!r}")

    def expectation(self, ctx_id: str, members: Sequence[str] | None = None) -> float:
        """Expectation of the product of ``members`` (default: all) in a context."""
        ctx = self.context(ctx_id)
        members = list(ctx.members if members is None else members)
        marg = ctx.marginal(members)
        values = np.ones(marg.shape)
        for axis, m in enumerate(members):
            view = [1] * len(members)
            view[axis] = marg.shape[axis]
            values = values * np.asarray(self.variable(m).values).reshape(view)
        return float((marg * values).sum())

    def with_hidden(self, members: Sequence[str], expectation: float) -> "EmpiricalModel":
        for m in members:
            self.variable(m)
        extra = HiddenConstraint(tuple(members), expectation)
        return EmpiricalModel(self.variables, self.contexts, self.hidden_constraints + (extra,))

    def without_context(self, ctx_id: str) -> "EmpiricalModel":
        self.context(ctx_id)
        kept = tuple(c for c in self.contexts if c.id != ctx_id)
        return EmpiricalModel(self.variables, kept, self.hidden_constraints)


@dataclass
class NoSignalReport:
    consistent: bool
    # (context id pair, shared variables, outcome assignment, probability gap)
    violations: list[tuple[tuple[str, str], tuple[str, ...], tuple[int, ...], float]]

    def __bool__(self):
        return self.consistent


def validate(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> EmpiricalModel:
    """Check every model invariant, raising :class:`ScenarioError` with a path."""
    ids = [v.id for v in model.variables]
    if len(set(ids)) != len(ids):
        raise ScenarioError("duplicate variable id", "variables")
    if not model.contexts:
        raise ScenarioError("model needs at least one context", "contexts")
    seen = set()
    for i, ctx in enumerate(model.contexts):
        path = f"contexts[{i}]"
        if not ctx.members:
            raise ScenarioError("context has no members", f"{path}.members")
        if len(set(ctx.members)) != len(ctx.members):
            raise ScenarioError("duplicate member", f"{path}.members")
        for m in ctx.members:
            if m not in ids:
                raise ScenarioError(f"undeclared variable {m!r}", f"{path}.members")
        seen.update(ctx.members)
        shape = tuple(model.variable(m).n_outcomes for m in ctx.members)
        if ctx.table.shape != shape:
            raise ScenarioError(
                f"table shape {ctx.table.shape} does not match member outcomes {shape}",
                f"{path}.table.probs",
            )
        if not np.all(np.isfinite(ctx.table)):
            raise ScenarioError("table has non-finite entries", f"{path}.table.probs")
        if ctx.table.min() < -tol:
            raise ScenarioError("table has negative entries", f"{path}.table.probs")
        total = float(ctx.table.sum())
        if abs(total - 1.0) > tol:
            raise ScenarioError(f"table sums to {total:.12g}, not 1", f"{path}.table.probs")
    for v in ids:
        if v not in seen:
            raise ScenarioError(f"variable {v!r} appears in no context", "variables")
    ctx_ids = [c.id for c in model.contexts]
    if len(set(ctx_ids)) != len(ctx_ids):
        raise ScenarioError("duplicate context id", "contexts")
    for i, hc in enumerate(model.hidden_constraints):
        for m in hc.members:
            if m not in ids:
                raise ScenarioError(
                    f"undeclared variable {m!r}", f"hidden_constraints[{i}].members"
                )
    return model


def _require(doc: Mapping, key: str, path: str, kind=None):
    if not isinstance(doc, Mapping) or key not in doc:
        raise ScenarioError(f"missing key {key!r}", path)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise ScenarioError(f"{key!r} must be {kind.__name__}", f"{path}.{key}" if path else key)
    return value


def load(document: str | bytes | Mapping[str, Any], tol: float = DEFAULT_TOL) -> EmpiricalModel:
    """Parse and validate a scenario document (JSON text or decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ScenarioError("document must be a JSON object")

    variables = []
    for i, vdoc in enumerate(_require(document, "variables", "", list)):
        path = f"variables[{i}]"
        var_id = _require(vdoc, "id", path, str)
        outcomes = _require(vdoc, "outcomes", path, list)
        try:
            labels = [_require(o, "label", f"{path}.outcomes[{k}]") for k, o in enumerate(outcomes)]
            values = [float(_require(o, "value", f"{path}.outcomes[{k}]")) for k, o in enumerate(outcomes)]
            variables.append(Variable(var_id, tuple(labels), tuple(values)))
        except (InputError, TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), path) from exc
    declared = {v.id: v for v in variables}

    contexts = []
    for i, cdoc in enumerate(_require(document, "contexts", "", list)):
        path = f"contexts[{i}]"
        members = _require(cdoc, "members", path, list)
        for m in members:
            if m not in declared:
                raise ScenarioError(f"undeclared variable {m!r}", f"{path}.members")
        ctx_id = cdoc.get("id", ",".join(members)) if isinstance(cdoc, Mapping) else None
        tdoc = _require(cdoc, "table", path, Mapping)
        order = tdoc.get("order", members)
        if sorted(order) != sorted(members) or len(set(order)) != len(order):
            raise ScenarioError("order must be a permutation of members", f"{path}.table.order")
        probs = _require(tdoc, "probs", f"{path}.table", list)
        shape = tuple(declared[m].n_outcomes for m in order)
        try:
            arr = np.array([float(p) for p in probs], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ScenarioError("probabilities must be numbers", f"{path}.table.probs") from exc
        if arr.size != int(np.prod(shape)):
            raise ScenarioError(
                f"expected {int(np.prod(shape))} probabilities, got {arr.size}",
                f"{path}.table.probs",
            )
        table = np.transpose(arr.reshape(shape), [list(order).index(m) for m in members])
        contexts.append(Context(str(ctx_id), tuple(members), table))

    hidden = []
    for i, hdoc in enumerate(document.get("hidden_constraints", []) or []):
        path = f"hidden_constraints[{i}]"
        members = _require(hdoc, "members", path, list)
        expectation = _require(hdoc, "expectation", path)
        if not isinstance(expectation, (int, float)):
            raise ScenarioError("expectation must be a number", f"{path}.expectation")
        hidden.append(HiddenConstraint(tuple(members), float(expectation)))

    return validate(EmpiricalModel(tuple(variables), tuple(contexts), tuple(hidden)), tol)


def emit(model: EmpiricalModel) -> dict[str, Any]:
    """Inverse of :func:`load`: the model as a JSON-ready mapping."""
    doc: dict[str, Any] = {
        "variables": [
            {
                "id": v.id,
                "outcomes": [{"label": l, "value": x} for l, x in zip(v.labels, v.values)],
            }
            for v in model.variables
        ],
        "contexts": [
            {
                "id": c.id,
                "members": list(c.members),
                "table": {"order": list(c.members), "probs": c.table.ravel().tolist()},
            }
            for c in model.contexts
        ],
    }
    if model.hidden_constraints:
        doc["hidden_constraints"] = [
            {"members": list(h.members), "expectation": h.expectation}
            for h in model.hidden_constraints
        ]
    return doc


def dumps(model: EmpiricalModel) -> str:
    return json.dumps(emit(model), indent=2)


def check_no_signal(model: EmpiricalModel, tol: float = DEFAULT_TOL) -> NoSignalReport:
    """Compare marginals over shared variables for every pair of contexts."""
    violations = []
    for c1, c2 in itertools.combinations(model.contexts, 2):
        shared = tuple(m for m in c1.members if m in c2.members)
        if not shared:
            continue
        gap = c1.marginal(shared) - c2.marginal(shared)
        for idx in zip(*np.nonzero(np.abs(gap) > tol)):
            idx = tuple(int(k) for k in idx)
            violations.append(((c1.id, c2.id), shared, idx, float(gap[idx])))
    return NoSignalReport(not violations, violations)


def _fixture(name: str) -> str:
    return resources.files("negprob.scenarios").joinpath(f"{name}.json").read_text()


def table_from_moments(mx: float, my: float, mxy: float) -> np.ndarray:
    """Joint table of two +/-1 variables with the given means and correlation."""
    signs = np.array([1.0, -1.0])
    return (1 + signs[:, None] * mx + signs[None, :] * my + np.outer(signs, signs) * mxy) / 4


def three_dichotomic(moments: Sequence[float] = (0, 0, 0, 0, 0, 0)) -> EmpiricalModel:
    """Cyclic X-Y, X-Z, Y-Z scenario from ``(<X>, <Y>, <Z>, <XY>, <XZ>, <YZ>)``."""
    if len(moments) != 6:
        raise InputError("three_dichotomic needs 6 moments: X, Y, Z, XY, XZ, YZ")
    x, y, z, xy, xz, yz = (float(m) for m in moments)
    variables = tuple(Variable.dichotomic(v) for v in "XYZ")
    contexts = (
        Context("X,Y", ("X", "Y"), table_from_moments(x, y, xy)),
        Context("X,Z", ("X", "Z"), table_from_moments(x, z, xz)),
        Context("Y,Z", ("Y", "Z"), table_from_moments(y, z, yz)),
    )
    return validate(EmpiricalModel(variables, contexts))


def builtin(name: str, moments: Sequence[float] | None = None) -> EmpiricalModel:
    """A built-in Bell, PR-box or Mermin table, or the cyclic three-variable model."""
    if name == "three_dichotomic":
        return three_dichotomic(moments if moments is not None else (0,) * 6)
    if moments is not None:
        raise InputError(f"moments only apply to three_dichotomic, not {name!r}")
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    return load(_fixture(name))


def parse_fraction_list(text: str) -> list[float]:
    """Parse ``"0,1/2,-1"`` style comma lists."""
    try:
        return [float(Fraction(tok.strip())) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc
