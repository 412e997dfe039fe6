"""Numeric oracle: brute-force finite-lambda computations used to verify the
asymptotic model.  Everything here works on concrete stochastic matrices and
never touches the aggregation machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import mono_eval
from .chain_model import PerturbedChain
from .errors import InputError, InternalError, ResourceError
from .evaluator import occupation, position
from .hierarchy import LimitModel

#: refuse matrix powers beyond this many steps
MAX_POWER_STEPS = 2**62

_ROW_SUM_TOL = 1e-9


def instantiate(chain: PerturbedChain, lam: float) -> np.ndarray:
    """Concrete stochastic matrix Q_lam (diagonal implied by the rows)."""
    if not 0.0 < lam <= chain.lambda_max * (1.0 + 1e-12):
        raise InputError(
            f"lambda {lam!r} outside the feasible range (0, {chain.lambda_max!r}]"
        )
    n = chain.n_states
    Q = np.zeros((n, n))
    for (src, dst), m in chain.entries.items():
        Q[chain.index[src], chain.index[dst]] = mono_eval(m, lam)
    diag = 1.0 - Q.sum(axis=1)
    if (diag < -1e-12).any():
        raise InputError(f"lambda {lam!r} leaves a negative implied diagonal")
    np.fill_diagonal(Q, np.clip(diag, 0.0, None))
    return Q


def _check_rows(Q: np.ndarray, what: str, steps: int = 0) -> None:
    # the instantiated matrix is stochastic only to machine precision, and a
    # power amplifies that defect linearly in the exponent, so the sanity
    # tolerance has to grow with the horizon (no renormalization is applied)
    tol = _ROW_SUM_TOL + 8.0 * np.finfo(float).eps * steps
    err = np.abs(Q.sum(axis=1) - 1.0).max()
    if err > tol:
        raise InternalError(f"{what}: rows deviate from 1 by {err:g}")


def matrix_power_position(Q: np.ndarray, t: float, lam: float, n_avg: int) -> np.ndarray:
    """Skeleton-averaged position at discrete time floor(t/lam): the mean of
    Q^(floor(t/lam)+r) over r = 1..n_avg."""
    if lam <= 0:
        raise InputError(f"lambda must be > 0, got {lam!r}")
    if t < 0:
        raise InputError(f"t must be >= 0, got {t!r}")
    if n_avg < 1:
        raise InputError(f"averaging period must be >= 1, got {n_avg!r}")
    steps = math.floor(t / lam)
    if steps + n_avg > MAX_POWER_STEPS:
        raise ResourceError(f"horizon {steps} exceeds the power cap 2^62")
    P = np.linalg.matrix_power(Q, steps + 1)
    acc = P.copy()
    for _ in range(n_avg - 1):
        P = P @ Q
        acc += P
    acc /= n_avg
    _check_rows(acc, "averaged matrix power", steps=steps + n_avg)
    return acc


def _geometric_sum(B: np.ndarray, n: int) -> np.ndarray:
    """sum_{m=0}^{n-1} B^m by divide-and-conquer doubling (O(log^2 n) mults)."""
    if n == 0:
        return np.zeros_like(B)
    if n == 1:
        return np.eye(B.shape[0])
    half = n // 2
    G = _geometric_sum(B, half)
    G = G + np.linalg.matrix_power(B, half) @ G
    if n % 2:
        G = G + np.linalg.matrix_power(B, n - 1)
    return G


def discounted_sum(Q: np.ndarray, lam: float, t: float | None = None, total: bool = False) -> np.ndarray:
    """Discounted occupation at discount lambda: the partial sum
    lam * sum_{m<floor(t/lam)} ((1-lam) Q)^m, or the full resolvent
    lam * (Id - (1-lam) Q)^-1 when total=True."""
    if not 0.0 < lam < 1.0:
        raise InputError(f"lambda must lie in (0, 1), got {lam!r}")
    if total == (t is not None):
        raise InputError("give exactly one of t and total")
    n = Q.shape[0]
    B = (1.0 - lam) * Q
    if total:
        try:
            R = np.linalg.solve(np.eye(n) - B, lam * np.eye(n))
        except np.linalg.LinAlgError:
            raise InternalError("resolvent system is singular") from None
        _check_rows(R, "discounted resolvent", steps=math.ceil(1.0 / lam))
        return R
    if t < 0:
        raise InputError(f"t must be >= 0, got {t!r}")
    steps = math.floor(t / lam)
    if steps > MAX_POWER_STEPS:
        raise ResourceError(f"horizon {steps} exceeds the power cap 2^62")
    return lam * _geometric_sum(B, steps)


@dataclass
class SweepDiagnostics:
    """Per-lambda sup-norm errors of the limit model against the oracle."""

    entries: list[dict]
    position_non_increasing: bool
    occupation_non_increasing: bool
    total_non_increasing: bool

    def final(self, key: str) -> float:
        return self.entries[-1][key]


def _non_increasing(values, slack: float = 1.5, floor: float = 1e-12) -> bool:
    return all(b <= slack * a + floor for a, b in zip(values, values[1:]))


def convergence_sweep(chain: PerturbedChain, model: LimitModel, t: float, lambdas) -> SweepDiagnostics:
    """Compare limit position/occupation against the oracle along decreasing
    discounts and report whether the errors behave like a limit."""
    lambdas = list(lambdas)
    if not lambdas:
        raise InputError("need at least one lambda")
    if any(b >= a for a, b in zip(lambdas, lambdas[1:])):
        raise InputError("lambdas must be strictly decreasing")
    if t <= 0:
        raise InputError(f"t must be > 0, got {t!r}")

    pos_model = position(model, t=t)
    occ_model = occupation(model, t=t).matrix
    tot_model = occupation(model, total=True).matrix

    entries = []
    for lam in lambdas:
        Q = instantiate(chain, lam)
        pos_err = np.abs(matrix_power_position(Q, t, lam, model.N) - pos_model).max()
        occ_err = np.abs(discounted_sum(Q, lam, t=t) - occ_model).max()
        tot_err = np.abs(discounted_sum(Q, lam, total=True) - tot_model).max()
        entries.append(
            {
                "lambda": lam,
                "position_err": float(pos_err),
                "occupation_t_err": float(occ_err),
                "total_err": float(tot_err),
            }
        )
    return SweepDiagnostics(
        entries=entries,
        position_non_increasing=_non_increasing([e["position_err"] for e in entries]),
        occupation_non_increasing=_non_increasing([e["occupation_t_err"] for e in entries]),
        total_non_increasing=_non_increasing([e["total_err"] for e in entries]),
    )
