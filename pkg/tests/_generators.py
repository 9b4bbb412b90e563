"""Random scenario families shared by the test modules."""
import numpy as np

from negprob.measure import ContextAlgebra, OutcomeSpace, SignedMeasure, Variable, context_distribution
from negprob.scenario import Context, EmpiricalModel, validate

# context structures over dichotomic variables, all with at most 16 atoms
STRUCTURES = {
    "triangle": (3, [(0, 1), (0, 2), (1, 2)]),
    "chsh": (4, [(0, 2), (0, 3), (1, 2), (1, 3)]),
    "square": (4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    "chain": (4, [(0, 1), (1, 2), (2, 3)]),
    "pair": (3, [(0, 1), (1, 2)]),
    "two_triples": (4, [(0, 1, 2), (1, 2, 3)]),
    "mixed": (4, [(0, 1, 2), (2, 3), (3, 0)]),
}


def dichotomic_space(n):
    return OutcomeSpace(tuple(Variable.dichotomic(f"v{i}") for i in range(n)))


def model_from_measure(measure, contexts):
    space = measure.space
    ctxs = []
    for members in contexts:
        ids = tuple(space.ids[i] for i in members)
        probs = context_distribution(measure, ContextAlgebra(space, ids))
        probs = np.clip(probs, 0.0, None)
        ctxs.append(Context(",".join(ids), ids, (probs / probs.sum()).reshape((2,) * len(ids))))
    return validate(EmpiricalModel(space.variables, tuple(ctxs)))


def random_no_signal(rng, structure=None):
    """No-signal model: context marginals of a random global signed measure.

    The signed part is scaled so every context table stays non-negative,
    which makes a fair share of the draws contextual.
    """
    if structure is None:
        structure = rng.choice(sorted(STRUCTURES))
    n, contexts = STRUCTURES[structure]
    space = dichotomic_space(n)
    p = rng.dirichlet(np.ones(space.size))
    g = rng.normal(size=space.size)
    q = g - g.mean() + 1.0 / space.size
    mp = [context_distribution(SignedMeasure(space, p), ContextAlgebra(space, tuple(space.ids[i] for i in c))) for c in contexts]
    mq = [context_distribution(SignedMeasure(space, q), ContextAlgebra(space, tuple(space.ids[i] for i in c))) for c in contexts]
    mp, mq = np.concatenate(mp), np.concatenate(mq)
    # largest t with (1 - t) mp + t mq >= 0
    down = mq < mp
    t_max = np.min(mp[down] / (mp[down] - mq[down])) if down.any() else 1.0
    t = rng.uniform(0, t_max)
    return model_from_measure(SignedMeasure(space, (1 - t) * p + t * q), contexts)


def random_signaling(rng, model, eps_range=(0.02, 0.2)):
    """Copy of ``model`` with mass moved inside one table so a marginal shifts."""
    k = int(rng.integers(len(model.contexts)))
    ctx = model.contexts[k]
    table = ctx.table.copy()
    flat = table.ravel()
    sources = np.flatnonzero(flat > eps_range[0])
    src = int(rng.choice(sources))
    src_idx = np.unravel_index(src, table.shape)
    dests = [i for i in range(flat.size) if np.unravel_index(i, table.shape)[0] != src_idx[0]]
    dst = int(rng.choice(dests))
    eps = rng.uniform(eps_range[0], min(eps_range[1], flat[src]))
    flat[src] -= eps
    flat[dst] += eps
    contexts = list(model.contexts)
    contexts[k] = Context(ctx.id, ctx.members, flat.reshape(table.shape))
    return EmpiricalModel(model.variables, tuple(contexts), model.hidden_constraints)


def random_marginal_preserving(rng, model):
    """Copy of ``model`` with one 2x2 table's correlation nudged, marginals fixed."""
    pairs = [i for i, c in enumerate(model.contexts) if c.table.ndim == 2]
    k = int(rng.choice(pairs))
    ctx = model.contexts[k]
    t = ctx.table
    pattern = np.array([[1.0, -1.0], [-1.0, 1.0]])
    lo = -min(t[0, 0], t[1, 1])
    hi = min(t[0, 1], t[1, 0])
    eps = rng.uniform(lo, hi)
    contexts = list(model.contexts)
    contexts[k] = Context(ctx.id, ctx.members, np.clip(t + eps * pattern, 0.0, None))
    return EmpiricalModel(model.variables, tuple(contexts), model.hidden_constraints)


def brute_force_events(space, rng, k=3):
    """``k`` random disjoint events as lists of atoms."""
    atoms = list(space.atoms)
    labels = rng.integers(0, k + 1, size=len(atoms))
    return [[a for a, l in zip(atoms, labels) if l == j] for j in range(k)]

