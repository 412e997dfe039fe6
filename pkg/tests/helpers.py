"""Shared test utilities: fixture paths, random chain generators, numeric oracles."""

from fractions import Fraction
from pathlib import Path

import numpy as np

from markovscale import chain_from_entries, monomial

FIXTURES = Path(__file__).resolve().parent / "fixtures"

# exponent grid used by the randomized suites
EXPONENT_POOL = (
    Fraction(0),
    Fraction(1, 5),
    Fraction(1, 3),
    Fraction(1, 2),
    Fraction(1),
    Fraction(3, 2),
    Fraction(2),
)


def fixture(name: str) -> str:
    return str(FIXTURES / name)


def random_chain(rng: np.random.Generator, max_states: int = 6):
    """A small valid chain with exponents drawn from EXPONENT_POOL.

    Rows come in three flavours: absorbing, exactly leaving (exponent-0 mass
    summing to one), and leaking rows whose exponent-0 mass is kept <= 0.85 so
    the implied diagonal stays positive at moderate lambda.
    """
    n = int(rng.integers(2, max_states + 1))
    states = [f"s{i}" for i in range(n)]
    entries = {}
    for src in states:
        others = [s for s in states if s != src]
        if rng.random() < 0.2:
            continue
        k = int(rng.integers(1, min(3, len(others)) + 1))
        targets = [str(t) for t in rng.choice(others, size=k, replace=False)]
        exps = [EXPONENT_POOL[int(rng.integers(len(EXPONENT_POOL)))] for _ in targets]
        coeffs = rng.uniform(0.1, 1.0, size=k)
        zero_idx = [j for j, e in enumerate(exps) if e == 0]
        if zero_idx:
            if len(zero_idx) == k and rng.random() < 0.4:
                coeffs = coeffs / coeffs.sum()
            else:
                mass = float(sum(coeffs[j] for j in zero_idx))
                if mass > 0.85:
                    for j in zero_idx:
                        coeffs[j] *= 0.85 / mass
        for tgt, e, c in zip(targets, exps, coeffs):
            entries[(src, tgt)] = monomial(float(c), e)
    return chain_from_entries(states, entries)


def random_critical_chain(rng: np.random.Generator):
    """Exponent-1 ring (plus chords) with tiny exponent-3/2 noise; 3-5 states.

    The noise coefficients are deliberately two orders of magnitude below the
    rates: an exponent-3/2 entry perturbs the finite-lambda position at the
    lambda^(1/2) scale, so it must stay below the O(lambda) discretization
    term for the first-order convergence of the rate matrix to be observable
    down to lambda = 1e-4.
    """
    n = int(rng.integers(3, 6))
    states = [f"c{i}" for i in range(n)]
    entries = {}
    for i, src in enumerate(states):
        ring = states[(i + 1) % n]
        entries[(src, ring)] = monomial(float(rng.uniform(0.5, 0.9)), Fraction(1))
        others = [s for s in states if s not in (src, ring)]
        if others and rng.random() < 0.4:
            chord = str(rng.choice(others))
            entries[(src, chord)] = monomial(float(rng.uniform(0.2, 0.5)), Fraction(1))
        rest = [s for s in others if (src, s) not in entries]
        if rest and rng.random() < 0.8:
            noise = str(rng.choice(rest))
            entries[(src, noise)] = monomial(float(rng.uniform(1e-4, 5e-4)), Fraction(3, 2))
    return chain_from_entries(states, entries)


def critical_generator(chain) -> np.ndarray:
    """Rate matrix read off the exponent-1 coefficients (zero elsewhere)."""
    n = chain.n_states
    A = np.zeros((n, n))
    for (src, dst), mono in chain.entries.items():
        if mono.exp == 1:
            A[chain.index[src], chain.index[dst]] = mono.coeff
    np.fill_diagonal(A, 0.0)
    A[np.diag_indices(n)] = -A.sum(axis=1)
    return A


def random_absorbing_chain(rng: np.random.Generator, e: Fraction):
    """One active origin row with minimal exponent e; every other state frozen.

    Roughly a third of the chains get an extra slower arc (exponent e + 1/2)
    to a state outside the attaining set.
    """
    n = int(rng.integers(3, 6))
    states = [f"a{i}" for i in range(n)]
    origin = states[0]
    others = states[1:]
    k = int(rng.integers(1, len(others) + 1))
    targets = [str(t) for t in rng.choice(others, size=k, replace=False)]
    entries = {}
    for tgt in targets:
        entries[(origin, tgt)] = monomial(float(rng.uniform(0.2, 1.0)), e)
    rest = [s for s in others if s not in targets]
    if rest and rng.random() < 0.35:
        slow = str(rng.choice(rest))
        entries[(origin, slow)] = monomial(float(rng.uniform(0.2, 0.8)), e + Fraction(1, 2))
    return chain_from_entries(states, entries)


def random_trap_chain(rng: np.random.Generator):
    """A transient set held together by exponent-0 arcs, leaking at 1/2 or 1.

    The leak exponents keep a gap of at least 1/2 from the holding arcs, so
    numeric absorption converges at the lambda^(1/2) scale.  Every trap state
    leaks at exponent 1/2 with a coefficient of order one: the finite-lambda
    occupation of the trap is about lambda^(1/2) divided by the mean leak
    rate, and weak leaks would push that residue past the tolerance the
    sweeps are verified at.  Occasional exponent-1 leaks are layered on top;
    they only shorten the trap's lifetime.
    """
    n_targets = int(rng.integers(2, 4))
    n_trap = int(rng.integers(2, 4))
    targets = [f"g{i}" for i in range(n_targets)]
    trap = [f"t{i}" for i in range(n_trap)]
    states = ["entry"] + trap + targets
    entries = {}
    for i, u in enumerate(trap):
        v = trap[(i + 1) % n_trap]
        entries[(u, v)] = monomial(float(rng.uniform(0.3, 0.6)), Fraction(0))
    for i, u in enumerate(trap):
        tgt = str(rng.choice(targets))
        entries[(u, tgt)] = monomial(float(rng.uniform(0.6, 1.2)), Fraction(1, 2))
        spare = [g for g in targets if g != tgt]
        if spare and rng.random() < 0.4:
            slow = str(rng.choice(spare))
            entries[(u, slow)] = monomial(float(rng.uniform(0.05, 0.3)), Fraction(1))
    heads = [str(t) for t in rng.choice(trap, size=min(2, n_trap), replace=False)]
    if rng.random() < 0.4:
        heads.append(str(rng.choice(targets)))
    w = rng.uniform(0.1, 0.5, size=len(heads))
    w = 0.9 * w / w.sum()
    for s, c in zip(heads, w):
        entries[("entry", s)] = monomial(float(c), Fraction(0))
    return chain_from_entries(states, entries)


def absorbing_states(chain) -> list:
    """States with no outgoing entries."""
    return [s for s in chain.states if not chain.row(s)]


def absorption_probabilities(Q: np.ndarray, transient_idx, absorbing_idx) -> np.ndarray:
    """Absorption probabilities of the substochastic transient block."""
    T = Q[np.ix_(transient_idx, transient_idx)]
    R = Q[np.ix_(transient_idx, absorbing_idx)]
    return np.linalg.solve(np.eye(len(transient_idx)) - T, R)


def stationary_vector(Q: np.ndarray) -> np.ndarray:
    """Stationary row vector of an irreducible stochastic matrix."""
    n = Q.shape[0]
    A = (Q.T - np.eye(n)).copy()
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def cesaro_payoff(Q: np.ndarray, g: np.ndarray, offset: int, count: int) -> np.ndarray:
    """Average of Q^(offset+1) g ... Q^(offset+count) g."""
    acc = np.zeros_like(g, dtype=float)
    P = np.linalg.matrix_power(Q, offset + 1)
    for _ in range(count):
        acc += P @ g
        P = P @ Q
    return acc / count
