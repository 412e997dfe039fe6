"""Perturbed-chain model: loading, validation, and elementary row structure.

A perturbed chain stores only the off-diagonal leading-order entries
(coeff, exp) of a family of stochastic matrices Q_lam; the diagonal is implied,
each row's diagonal being one minus the row sum.  Validation guarantees that
some interval (0, lambda_max] of parameter values yields honest stochastic
matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .asymptotics import (
    INF,
    Monomial,
    format_exponent,
    mono_eval,
    mono_sum,
    monomial,
    parse_exponent,
)
from .errors import ChainFormatError

#: rows whose exponent-0 coefficients sum to within this of 1 are treated as
#: exactly leaving (the implied diagonal vanishes identically)
EXACT_LEAVING_TOL = 1e-9

_CHAIN_KEYS = {"states", "transitions"}
_TRANSITION_KEYS = {"from", "to", "coeff", "exp"}


@dataclass
class PerturbedChain:
    states: tuple[str, ...]
    entries: dict[tuple[str, str], Monomial]
    lambda_max: float
    index: dict[str, int] = field(default_factory=dict, repr=False)
    _rows: dict[str, dict[str, Monomial]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {s: i for i, s in enumerate(self.states)}
        self._rows = {s: {} for s in self.states}
        for (src, dst), m in self.entries.items():
            self._rows[src][dst] = m

    def row(self, state: str) -> dict[str, Monomial]:
        """Off-diagonal entries leaving `state` (possibly empty)."""
        return self._rows[state]

    @property
    def n_states(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class RowExit:
    """Total exit monomial of a row and the set of targets attaining it."""

    state: str
    exit: Monomial
    attaining: frozenset[str]


def _row_exp0_mass(row: dict[str, Monomial]) -> float:
    return sum(m.coeff for m in row.values() if m.exp == 0)


def _is_exactly_leaving(row: dict[str, Monomial]) -> bool:
    return abs(_row_exp0_mass(row) - 1.0) <= EXACT_LEAVING_TOL


def _row_lambda_max(state: str, row: dict[str, Monomial]) -> float:
    """Largest lam in (0, 1] keeping this row's implied diagonal nonnegative."""
    if not row:
        return 1.0
    positive = [m for m in row.values() if m.exp > 0]
    if _is_exactly_leaving(row):
        if positive:
            raise ChainFormatError(
                f"row {state!r}: exponent-0 coefficients already sum to 1, "
                "so the extra positive-exponent entries leave no feasible lambda"
            )
        return 1.0

    def diag(lam: float) -> float:
        return 1.0 - sum(mono_eval(m, lam) for m in row.values())

    if diag(1.0) >= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0  # diag(0+) > 0 since exp-0 mass < 1 here
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if diag(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def chain_from_entries(
    states, entries: dict[tuple[str, str], Monomial]
) -> PerturbedChain:
    """Build and validate a chain from explicit off-diagonal monomials."""
    states = tuple(states)
    if not states:
        raise ChainFormatError("chain has an empty state set")
    seen = set()
    for s in states:
        if not isinstance(s, str) or not s:
            raise ChainFormatError(f"state names must be nonempty strings, got {s!r}")
        if s in seen:
            raise ChainFormatError(f"duplicate state name {s!r}")
        seen.add(s)

    rows: dict[str, dict[str, Monomial]] = {s: {} for s in states}
    for (src, dst), m in entries.items():
        if src not in seen:
            raise ChainFormatError(f"transition from unknown state {src!r}")
        if dst not in seen:
            raise ChainFormatError(f"transition to unknown state {dst!r}")
        if src == dst:
            raise ChainFormatError(
                f"diagonal entry {src!r} -> {dst!r} is implied and must not be given"
            )
        if dst in rows[src]:
            raise ChainFormatError(f"duplicate transition {src!r} -> {dst!r}")
        if m.is_zero():
            continue  # zero entries are simply absent
        if m.coeff <= 0:
            raise ChainFormatError(
                f"transition {src!r} -> {dst!r}: coefficient must be > 0, got {m.coeff!r}"
            )
        if m.exp == INF or m.exp < 0:
            raise ChainFormatError(
                f"transition {src!r} -> {dst!r}: exponent must be finite and >= 0, "
                f"got {format_exponent(m.exp)}"
            )
        rows[src][dst] = m

    lambda_max = 1.0
    for s in states:
        mass0 = _row_exp0_mass(rows[s])
        if mass0 > 1.0 + EXACT_LEAVING_TOL:
            raise ChainFormatError(
                f"row {s!r}: exponent-0 coefficients sum to {mass0!r} > 1"
            )
        lambda_max = min(lambda_max, _row_lambda_max(s, rows[s]))

    flat = {(s, d): m for s in states for d, m in rows[s].items()}
    return PerturbedChain(states=states, entries=flat, lambda_max=lambda_max)


def load_chain(source) -> PerturbedChain:
    """Load a chain from a JSON document (path, JSON text is not accepted —
    pass a parsed dict instead) and validate it.

    Document shape::

        {"states": ["1", "2"],
         "transitions": [{"from": "1", "to": "2", "coeff": 1.0, "exp": "1/5"}]}

    Unknown keys anywhere are rejected, as are duplicate transitions.
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ChainFormatError(f"cannot read chain file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ChainFormatError(f"chain file is not valid JSON: {exc}") from None
    else:
        doc = source

    if not isinstance(doc, dict):
        raise ChainFormatError("chain document must be a JSON object")
    extra = set(doc) - _CHAIN_KEYS
    if extra:
        raise ChainFormatError(f"unknown chain keys: {sorted(extra)}")
    if "states" not in doc or "transitions" not in doc:
        raise ChainFormatError("chain document needs 'states' and 'transitions'")
    states = doc["states"]
    if not isinstance(states, list):
        raise ChainFormatError("'states' must be a list of names")
    transitions = doc["transitions"]
    if not isinstance(transitions, list):
        raise ChainFormatError("'transitions' must be a list")

    entries: dict[tuple[str, str], Monomial] = {}
    for i, tr in enumerate(transitions):
        where = f"transitions[{i}]"
        if not isinstance(tr, dict):
            raise ChainFormatError(f"{where}: must be an object")
        extra = set(tr) - _TRANSITION_KEYS
        if extra:
            raise ChainFormatError(f"{where}: unknown keys {sorted(extra)}")
        missing = _TRANSITION_KEYS - set(tr)
        if missing:
            raise ChainFormatError(f"{where}: missing keys {sorted(missing)}")
        src, dst = tr["from"], tr["to"]
        coeff = tr["coeff"]
        if not isinstance(coeff, (int, float)) or isinstance(coeff, bool):
            raise ChainFormatError(f"{where}: 'coeff' must be a number")
        if coeff <= 0:
            raise ChainFormatError(f"{where}: 'coeff' must be > 0, got {coeff!r}")
        try:
            exp = parse_exponent(tr["exp"])
            m = monomial(float(coeff), exp)
        except ValueError as exc:
            raise ChainFormatError(f"{where}: {exc}") from None
        if (src, dst) in entries:
            raise ChainFormatError(f"{where}: duplicate transition {src!r} -> {dst!r}")
        entries[(src, dst)] = m
    return chain_from_entries(states, entries)


def dump_chain(chain: PerturbedChain) -> dict:
    """Serialize back to the document shape accepted by load_chain."""
    order = chain.index
    transitions = [
        {"from": src, "to": dst, "coeff": m.coeff, "exp": format_exponent(m.exp)}
        for (src, dst), m in sorted(
            chain.entries.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]])
        )
    ]
    return {"states": list(chain.states), "transitions": transitions}


def row_exit(chain: PerturbedChain, state: str) -> RowExit:
    """Total exit monomial of a row and the targets attaining its exponent."""
    if state not in chain.index:
        raise ChainFormatError(f"unknown state {state!r}")
    row = chain.row(state)
    total = mono_sum(row.values())
    if total.is_zero():
        return RowExit(state=state, exit=total, attaining=frozenset())
    attaining = frozenset(d for d, m in row.items() if m.exp == total.exp)
    return RowExit(state=state, exit=total, attaining=attaining)


def sub_unit_skeleton(chain: PerturbedChain) -> dict[str, set[str]]:
    """Adjacency of the sub-unit skeleton: arcs with exponent < 1, plus a
    self-loop wherever the implied diagonal survives in the limit (exponent-0
    off-diagonal mass < 1)."""
    adj: dict[str, set[str]] = {}
    for s in chain.states:
        row = chain.row(s)
        succ = {d for d, m in row.items() if m.exp < 1}
        if not _is_exactly_leaving(row):
            succ.add(s)
        adj[s] = succ
    return adj


def averaging_period(chain: PerturbedChain) -> int:
    """Product of the periods of the recurrence classes of the sub-unit
    skeleton (empty product = 1)."""
    from .structure import classify  # local import to avoid a cycle

    decomp = classify(sub_unit_skeleton(chain))
    n = 1
    for cls in decomp.recurrent:
        n *= decomp.period[cls]
    return n


def exponent_set(chain: PerturbedChain) -> set[Fraction]:
    """Distinct entry exponents (used for iteration guards)."""
    return {m.exp for m in chain.entries.values()}
