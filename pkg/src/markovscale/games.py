"""Two-player zero-sum stochastic games and their reduction to perturbed
chains under discount-dependent (regular) stationary strategies.

A strategy family assigns each state a leading-order mixture over actions:
action weights are monomials in the discount, with the exponent-0 weights
summing to 1 (the limit mixture) and slower corrections allowed.  Fixing both
players' families turns the game into a perturbed chain plus a limit payoff
vector, which the aggregation machinery then evaluates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .asymptotics import ZERO, Monomial, mono_add, mono_limit, mono_mul, monomial, parse_exponent
from .chain_model import PerturbedChain, chain_from_entries
from .errors import ChainFormatError
from .evaluator import limit_payoff
from .hierarchy import analyze

_GAME_KEYS = {"states", "actions1", "actions2", "payoff", "transition", "strategy1", "strategy2"}
_TRANSITION_SUM_TOL = 1e-12
_STRATEGY_MASS_TOL = 1e-9

#: per-state mixture of actions with monomial weights
Strategy = dict[str, dict[str, Monomial]]


@dataclass
class StochasticGame:
    states: tuple[str, ...]
    actions1: dict[str, tuple[str, ...]]
    actions2: dict[str, tuple[str, ...]]
    payoff: dict[str, np.ndarray]  # shape (len(actions1[s]), len(actions2[s])), values in [0, 1]
    transition: dict[str, dict[str, dict[str, dict[str, float]]]]  # s -> a1 -> a2 -> dest -> prob


def _validate_actions(states, spec, who) -> dict[str, tuple[str, ...]]:
    if not isinstance(spec, dict) or set(spec) != set(states):
        raise ChainFormatError(f"{who} must map every state to its action list")
    out = {}
    for s, acts in spec.items():
        if not isinstance(acts, list) or not acts:
            raise ChainFormatError(f"{who}[{s!r}] must be a nonempty list")
        if len(set(acts)) != len(acts):
            raise ChainFormatError(f"{who}[{s!r}] has duplicate actions")
        out[s] = tuple(acts)
    return out


def load_game(source) -> tuple[StochasticGame, Strategy, Strategy]:
    """Load a game document (path or parsed dict) with both strategy families.

    Shape::

        {"states": [...],
         "actions1": {state: [action, ...]}, "actions2": {...},
         "payoff": {state: [[g(s,i,j) ...] ...]},
         "transition": {state: {a1: {a2: {dest: prob}}}},
         "strategy1": {state: {action: {"coeff": c, "exp": "e"}}},
         "strategy2": {...}}
    """
    if isinstance(source, (str, Path)):
        try:
            with open(source) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ChainFormatError(f"cannot read game file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ChainFormatError(f"game file is not valid JSON: {exc}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ChainFormatError("game document must be a JSON object")
    extra = set(doc) - _GAME_KEYS
    if extra:
        raise ChainFormatError(f"unknown game keys: {sorted(extra)}")
    missing = _GAME_KEYS - set(doc)
    if missing:
        raise ChainFormatError(f"game document is missing keys: {sorted(missing)}")

    states = doc["states"]
    if not isinstance(states, list) or not states or len(set(states)) != len(states):
        raise ChainFormatError("'states' must be a nonempty list of distinct names")
    states = tuple(states)
    actions1 = _validate_actions(states, doc["actions1"], "actions1")
    actions2 = _validate_actions(states, doc["actions2"], "actions2")

    payoff = {}
    for s in states:
        rows = doc["payoff"].get(s) if isinstance(doc["payoff"], dict) else None
        if rows is None:
            raise ChainFormatError(f"payoff is missing state {s!r}")
        mat = np.asarray(rows, dtype=float)
        if mat.shape != (len(actions1[s]), len(actions2[s])):
            raise ChainFormatError(
                f"payoff[{s!r}] has shape {mat.shape}, expected "
                f"({len(actions1[s])}, {len(actions2[s])})"
            )
        if not np.isfinite(mat).all() or (mat < 0).any() or (mat > 1).any():
            raise ChainFormatError(f"payoff[{s!r}] values must lie in [0, 1]")
        payoff[s] = mat

    transition = {}
    tspec = doc["transition"]
    if not isinstance(tspec, dict) or set(tspec) != set(states):
        raise ChainFormatError("'transition' must map every state")
    for s in states:
        bys = {}
        if not isinstance(tspec[s], dict) or set(tspec[s]) != set(actions1[s]):
            raise ChainFormatError(f"transition[{s!r}] must map every action of player 1")
        for a1 in actions1[s]:
            bya = {}
            cell = tspec[s][a1]
            if not isinstance(cell, dict) or set(cell) != set(actions2[s]):
                raise ChainFormatError(
                    f"transition[{s!r}][{a1!r}] must map every action of player 2"
                )
            for a2 in actions2[s]:
                dist = cell[a2]
                if not isinstance(dist, dict) or not dist:
                    raise ChainFormatError(
                        f"transition[{s!r}][{a1!r}][{a2!r}] must be a nonempty map"
                    )
                total = 0.0
                clean = {}
                for dest, p in dist.items():
                    if dest not in set(states):
                        raise ChainFormatError(
                            f"transition[{s!r}][{a1!r}][{a2!r}] targets unknown state {dest!r}"
                        )
                    if not isinstance(p, (int, float)) or isinstance(p, bool) or p < 0:
                        raise ChainFormatError(
                            f"transition[{s!r}][{a1!r}][{a2!r}][{dest!r}] must be a probability"
                        )
                    total += float(p)
                    clean[dest] = float(p)
                if abs(total - 1.0) > _TRANSITION_SUM_TOL:
                    raise ChainFormatError(
                        f"transition[{s!r}][{a1!r}][{a2!r}] sums to {total!r}, not 1"
                    )
                bya[a2] = clean
            bys[a1] = bya
        transition[s] = bys

    game = StochasticGame(
        states=states,
        actions1=actions1,
        actions2=actions2,
        payoff=payoff,
        transition=transition,
    )
    x = _load_strategy(doc["strategy1"], game.actions1, "strategy1")
    y = _load_strategy(doc["strategy2"], game.actions2, "strategy2")
    return game, x, y


def _load_strategy(spec, actions, who) -> Strategy:
    if not isinstance(spec, dict) or set(spec) != set(actions):
        raise ChainFormatError(f"{who} must map every state")
    out: Strategy = {}
    for s, mix in spec.items():
        if not isinstance(mix, dict) or not mix:
            raise ChainFormatError(f"{who}[{s!r}] must be a nonempty map action -> monomial")
        row = {}
        for a, doc in mix.items():
            if a not in actions[s]:
                raise ChainFormatError(f"{who}[{s!r}] uses unknown action {a!r}")
            if not isinstance(doc, dict) or set(doc) != {"coeff", "exp"}:
                raise ChainFormatError(
                    f"{who}[{s!r}][{a!r}] must be an object with 'coeff' and 'exp'"
                )
            try:
                m = monomial(float(doc["coeff"]), parse_exponent(doc["exp"]))
            except (TypeError, ValueError) as exc:
                raise ChainFormatError(f"{who}[{s!r}][{a!r}]: {exc}") from None
            if m.is_zero():
                raise ChainFormatError(f"{who}[{s!r}][{a!r}]: weight must be positive")
            if m.exp < 0:
                raise ChainFormatError(f"{who}[{s!r}][{a!r}]: exponent must be >= 0")
            row[a] = m
        out[s] = row
    validate_strategy(out, actions, who)
    return out


def validate_strategy(strategy: Strategy, actions, who: str = "strategy") -> None:
    """A regular strategy family must put exponent-0 mass summing to 1 on each
    state (the limit mixture), with all weights positive and exponents >= 0."""
    for s, row in strategy.items():
        for a, m in row.items():
            if a not in actions[s]:
                raise ChainFormatError(f"{who}[{s!r}] uses unknown action {a!r}")
            if m.is_zero() or m.coeff <= 0 or m.exp < 0:
                raise ChainFormatError(
                    f"{who}[{s!r}][{a!r}] must have positive weight and exponent >= 0"
                )
        mass0 = sum(m.coeff for m in row.values() if m.exp == 0)
        if abs(mass0 - 1.0) > _STRATEGY_MASS_TOL:
            raise ChainFormatError(
                f"{who}[{s!r}]: exponent-0 weights sum to {mass0!r}, not 1"
            )


def compile_game(game: StochasticGame, x: Strategy, y: Strategy) -> tuple[PerturbedChain, np.ndarray]:
    """Reduce the game under fixed strategy families to a perturbed chain and
    the limit per-state payoff vector.

    Each off-diagonal chain entry is the leading order of
    sum_{i,j} x(i) y(j) q(dest | s, i, j); self-transitions are dropped (the
    implied diagonal picks them up).  The payoff vector is the limit of the
    bilinear form sum_{i,j} x(i) y(j) g(s, i, j).
    """
    validate_strategy(x, game.actions1, "strategy1")
    validate_strategy(y, game.actions2, "strategy2")
    entries: dict[tuple[str, str], Monomial] = {}
    gvec = np.zeros(len(game.states))
    i1 = {s: {a: k for k, a in enumerate(game.actions1[s])} for s in game.states}
    i2 = {s: {a: k for k, a in enumerate(game.actions2[s])} for s in game.states}
    for si, s in enumerate(game.states):
        acc: dict[str, Monomial] = {}
        gacc = ZERO
        for a1, xm in x[s].items():
            for a2, ym in y[s].items():
                w = mono_mul(xm, ym)
                gval = game.payoff[s][i1[s][a1], i2[s][a2]]
                gacc = mono_add(gacc, mono_mul(w, monomial(gval, 0)))
                for dest, p in game.transition[s][a1][a2].items():
                    if dest == s or p == 0.0:
                        continue
                    acc[dest] = mono_add(acc.get(dest, ZERO), mono_mul(w, monomial(p, 0)))
        for dest, m in acc.items():
            if not m.is_zero():
                entries[(s, dest)] = m
        gvec[si] = mono_limit(gacc)
    chain = chain_from_entries(game.states, entries)
    return chain, gvec


def limit_game_payoff(game: StochasticGame, x: Strategy, y: Strategy) -> np.ndarray:
    """Limit discounted payoff of the strategy pair, per starting state."""
    chain, g = compile_game(game, x, y)
    model = analyze(chain)
    return limit_payoff(model, g)
