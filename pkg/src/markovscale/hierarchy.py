"""Multi-scale aggregation of a perturbed chain.

Starting from the chain itself (level 0, every state a recurrent singleton),
each level k picks the smallest exit exponent alpha_k among the previous
level's recurrent nodes, decomposes the previous node set under the
leading-order arcs available at that threshold, replaces every recurrence
class by a single aggregated node carrying its invariant-measure-weighted
exits, and repeats.  The loop stops as soon as the next threshold reaches 1:
the surviving classes evolve on the 1/lam time scale, and the limit occupation
structure is

    P_t = mu . exp(A t) . M

with mu the entrance law into the final classes, A the aggregated unit-scale
generator, and M the within-class limit measures, plus the skeleton averaging
period N for the extended (stepwise) position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .asymptotics import (
    INF,
    ONE,
    ZERO,
    Exponent,
    Monomial,
    format_exponent,
    mono_add,
    mono_limit,
    mono_mul,
)
from .chain_model import EXACT_LEAVING_TOL, PerturbedChain, averaging_period, exponent_set
from .errors import InputError, InternalError
from .structure import (
    CLASS_SIZE_CAP,
    ClassDecomposition,
    classify,
    entrance_law,
    invariant_measure,
)

#: aggregated nodes are tuples of original states, ordered by state index
Node = tuple

ONE_EXP = Fraction(1)


@dataclass
class HierarchyLevel:
    """One rung of the aggregation ladder.

    `nodes` live on this level; `restricted`, the class decomposition and the
    class measures are expressed over the previous level's nodes.  The base
    level (index 0) has no threshold and no decomposition.
    """

    index: int
    alpha: Exponent | None
    nodes: list[Node]
    recurrent_nodes: list[Node]
    transient_nodes: list[Node]
    period: dict[Node, int]
    measures: dict[Node, dict[Node, Monomial]]
    aggregated: dict[Node, dict[Node, Monomial]]
    parent: dict[Node, Node]
    restricted: dict[Node, dict[Node, Monomial]] | None = None


@dataclass
class LimitModel:
    """Asymptotic occupation structure of a perturbed chain."""

    chain: PerturbedChain
    levels: list[HierarchyLevel]
    terminal_alpha: Exponent
    classes: list[Node]
    mu: np.ndarray
    A: np.ndarray
    M: np.ndarray
    N: int
    alphas: list[Exponent] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_of(self, state: str) -> int | None:
        for i, cls in enumerate(self.classes):
            if state in cls:
                return i
        return None


def _base_level(chain: PerturbedChain) -> HierarchyLevel:
    nodes = [(s,) for s in chain.states]
    agg: dict[Node, dict[Node, Monomial]] = {n: {} for n in nodes}
    for (src, dst), m in chain.entries.items():
        agg[(src,)][(dst,)] = m
    return HierarchyLevel(
        index=0,
        alpha=None,
        nodes=nodes,
        recurrent_nodes=list(nodes),
        transient_nodes=[],
        period={},
        measures={},
        aggregated=agg,
        parent={},
    )


def next_threshold(level: HierarchyLevel) -> Exponent:
    """Smallest exit exponent among the level's recurrent nodes (inf if none)."""
    alpha: Exponent = INF
    for node in level.recurrent_nodes:
        for m in level.aggregated[node].values():
            if m.exp < alpha:
                alpha = m.exp
    return alpha


def _level_support(aggregated: dict, nodes: list[Node], alpha: Exponent) -> dict:
    """Leading-order support at threshold alpha: rows whose minimal exit
    exponent is <= alpha contribute their min-attaining arcs, all other rows
    are absorbing; self-loops follow the surviving-diagonal rule."""
    support = {}
    for u in nodes:
        row = aggregated[u]
        emin = min((m.exp for m in row.values()), default=INF)
        if emin <= alpha:
            succ = {v for v, m in row.items() if m.exp == emin}
            if emin == 0:
                mass0 = sum(m.coeff for v, m in row.items() if m.exp == 0)
                if abs(mass0 - 1.0) > EXACT_LEAVING_TOL:
                    succ.add(u)
            else:
                succ.add(u)
        else:
            succ = {u}
        support[u] = succ
    return support


def _merge_nodes(members, state_order: dict) -> Node:
    merged = []
    for node in members:
        merged.extend(node)
    return tuple(sorted(merged, key=state_order.__getitem__))


def build_level(previous: HierarchyLevel, alpha: Exponent, chain: PerturbedChain,
                cap: int = CLASS_SIZE_CAP) -> HierarchyLevel:
    """Aggregate the previous level at threshold alpha."""
    Q = previous.aggregated
    prev_nodes = previous.nodes
    state_order = chain.index

    support = _level_support(Q, prev_nodes, alpha)
    decomp = classify(support)

    restricted = {
        u: {v: m for v, m in Q[u].items() if m.exp <= alpha} for u in prev_nodes
    }

    parent: dict[Node, Node] = {}
    new_nodes: list[Node] = []
    recurrent_nodes: list[Node] = []
    transient_nodes: list[Node] = []
    period: dict[Node, int] = {}
    measures: dict[Node, dict[Node, Monomial]] = {}

    for cls in decomp.recurrent:
        node = _merge_nodes(cls, state_order)
        for member in cls:
            parent[member] = node
        new_nodes.append(node)
        recurrent_nodes.append(node)
        period[node] = decomp.period[cls]
        measures[node] = invariant_measure(restricted, cls, cap=cap)
    for t in decomp.transient:
        parent[t] = t
        new_nodes.append(t)
        transient_nodes.append(t)

    new_nodes.sort(key=lambda n: state_order[n[0]])
    recurrent_nodes.sort(key=lambda n: state_order[n[0]])
    transient_nodes.sort(key=lambda n: state_order[n[0]])

    agg: dict[Node, dict[Node, Monomial]] = {n: {} for n in new_nodes}
    for cls in decomp.recurrent:
        node = parent[cls[0]]
        pi = measures[node]
        acc = agg[node]
        for z in cls:
            for v, m in Q[z].items():
                tgt = parent[v]
                if tgt == node:
                    continue
                acc[tgt] = mono_add(acc.get(tgt, ZERO), mono_mul(pi[z], m))
    for t in decomp.transient:
        acc = agg[t]
        for v, m in Q[t].items():
            tgt = parent[v]
            if tgt == t:
                continue
            acc[tgt] = mono_add(acc.get(tgt, ZERO), m)

    return HierarchyLevel(
        index=previous.index + 1,
        alpha=alpha,
        nodes=new_nodes,
        recurrent_nodes=recurrent_nodes,
        transient_nodes=transient_nodes,
        period=period,
        measures=measures,
        aggregated=agg,
        parent=parent,
        restricted=restricted,
    )


def analyze(chain: PerturbedChain, cap: int = CLASS_SIZE_CAP) -> LimitModel:
    """Run the aggregation ladder to termination and assemble mu, A, M, N."""
    base = _base_level(chain)
    levels = [base]
    current = base
    alphas: list[Exponent] = []
    guard = chain.n_states * max(1, len(exponent_set(chain))) + 1
    terminal: Exponent | None = None
    for _ in range(guard):
        alpha = next_threshold(current)
        if alpha >= 1:
            terminal = alpha
            break
        if alphas and not alpha > alphas[-1]:
            raise InternalError(
                f"thresholds failed to increase strictly "
                f"({format_exponent(alphas[-1])} then {format_exponent(alpha)})"
            )
        alphas.append(alpha)
        current = build_level(current, alpha, chain, cap=cap)
        levels.append(current)
    if terminal is None:
        raise InternalError("aggregation did not terminate within the iteration guard")

    final = current
    classes = list(final.recurrent_nodes)
    nclasses = len(classes)
    n = chain.n_states

    decomp = ClassDecomposition(
        recurrent=[(node,) for node in classes],
        transient=list(final.transient_nodes),
        period={},
    )
    law = entrance_law(final.aggregated, decomp, cap=cap)

    node_of: dict[str, Node] = {}
    for node in final.nodes:
        for s in node:
            node_of[s] = node

    mu = np.zeros((n, nclasses))
    for s in chain.states:
        mu[chain.index[s]] = law[node_of[s]]

    A = np.zeros((nclasses, nclasses))
    for i, node in enumerate(classes):
        for v, m in final.aggregated[node].items():
            if m.exp < 1:
                raise InternalError(
                    "recurrent node keeps a sub-unit exit exponent at termination"
                )
            if m.exp == ONE_EXP:
                row_v = law[v]
                for j in range(nclasses):
                    if j != i:
                        A[i, j] += m.coeff * row_v[j]
        A[i, i] = -A[i].sum()

    M = np.zeros((nclasses, n))
    for i, node in enumerate(classes):
        for s in node:
            factor = ONE
            child: Node = (s,)
            for lev in levels[1:]:
                up = lev.parent[child]
                meas = lev.measures.get(up)
                if meas is not None:
                    factor = mono_mul(factor, meas[child])
                child = up
            M[i, chain.index[s]] = mono_limit(factor)

    return LimitModel(
        chain=chain,
        levels=levels,
        terminal_alpha=terminal,
        classes=classes,
        mu=mu,
        A=A,
        M=M,
        N=averaging_period(chain),
        alphas=alphas + [terminal],
    )


def _node_name(node: Node) -> str:
    if len(node) == 1:
        return node[0]
    return "{" + ",".join(node) + "}"


def _mono_doc(m: Monomial) -> dict:
    return {"coeff": m.coeff, "exp": format_exponent(m.exp)}


def report(model: LimitModel) -> dict:
    """JSON-able document: thresholds, per-level structure, and the limit data
    (classes, mu, A, M row-major, N)."""
    levels_doc = []
    for lev in model.levels[1:]:
        prev = model.levels[lev.index - 1]
        levels_doc.append(
            {
                "alpha": format_exponent(lev.alpha),
                "classes": [
                    [_node_name(member) for member in cls]
                    for cls in _level_classes(lev, prev)
                ],
                "transient": [_node_name(t) for t in lev.transient_nodes],
                "measures": {
                    _node_name(node): {
                        _node_name(member): _mono_doc(m) for member, m in meas.items()
                    }
                    for node, meas in lev.measures.items()
                },
            }
        )
    return {
        "alphas": [format_exponent(a) for a in model.alphas],
        "levels": levels_doc,
        "classes": [list(node) for node in model.classes],
        "mu": model.mu.tolist(),
        "A": model.A.tolist(),
        "M": model.M.tolist(),
        "N": model.N,
    }


def _level_classes(level: HierarchyLevel, previous: HierarchyLevel) -> list[list[Node]]:
    """Members (previous-level nodes) of each class node, in node order."""
    out = []
    for node in level.recurrent_nodes:
        members = [p for p in previous.nodes if level.parent[p] == node]
        out.append(members)
    return out


def parse_report(source) -> dict:
    """Validate a report document (dict or JSON text) and return it as a dict."""
    import json

    doc = json.loads(source) if isinstance(source, (str, bytes)) else source
    if not isinstance(doc, dict):
        raise InputError("report must be a JSON object")
    required = {"alphas", "levels", "classes", "mu", "A", "M", "N"}
    missing = required - set(doc)
    if missing:
        raise InputError(f"report is missing keys: {sorted(missing)}")
    extra = set(doc) - required
    if extra:
        raise InputError(f"report has unknown keys: {sorted(extra)}")
    if not isinstance(doc["alphas"], list) or not doc["alphas"]:
        raise InputError("report 'alphas' must be a nonempty list")
    if len(doc["levels"]) != len(doc["alphas"]) - 1:
        raise InputError("report 'levels' must have one entry per non-terminal alpha")
    if not isinstance(doc["N"], int) or doc["N"] < 1:
        raise InputError("report 'N' must be a positive integer")
    nclasses = len(doc["classes"])
    for key, rows, cols in (("mu", None, nclasses), ("A", nclasses, nclasses), ("M", nclasses, None)):
        mat = doc[key]
        if not isinstance(mat, list) or (rows is not None and len(mat) != rows):
            raise InputError(f"report {key!r} has the wrong shape")
        for r in mat:
            if not isinstance(r, list) or (cols is not None and len(r) != cols):
                raise InputError(f"report {key!r} has the wrong shape")
    return doc
