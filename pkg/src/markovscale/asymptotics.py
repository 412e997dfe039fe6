"""Leading-order monomial arithmetic in a small positive parameter.

Every quantity tracked by this package is the leading term of an expansion
c * lam**e + o(lam**e) with c >= 0 and a rational exponent e.  Arithmetic on
such terms is subtraction-free: addition keeps the smaller exponent (summing
coefficients on ties), multiplication multiplies coefficients and adds
exponents.  The zero element is represented with an infinite exponent so that
it is absorbing for addition and annihilating for multiplication.

Exponents are exact `fractions.Fraction` values; `math.inf` is the reserved
sentinel for the exponent of zero.  Exponent comparisons are exact; coefficient
comparisons elsewhere in the package use a relative tolerance of 1e-9.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Exponent = Union[Fraction, float]  # Fraction, or math.inf for the zero monomial

INF = math.inf

#: relative tolerance used when comparing monomial coefficients
COEFF_RTOL = 1e-9

_EXPONENT_RE = re.compile(r"^-?\d+(?:/\d+)?$")


def parse_exponent(text: str) -> Exponent:
    """Parse exponent text: an integer like "2", a fraction like "3/5", or "inf"."""
    if not isinstance(text, str):
        raise ValueError(f"exponent must be a string, got {text!r}")
    if text == "inf":
        return INF
    if not _EXPONENT_RE.match(text):
        raise ValueError(f"malformed exponent {text!r} (expected 'p', 'p/q' or 'inf')")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"malformed exponent {text!r} (zero denominator)") from None


def format_exponent(exp: Exponent) -> str:
    """Inverse of parse_exponent; Fractions render as 'p' or 'p/q'."""
    if exp == INF:
        return "inf"
    return str(exp)


@dataclass(frozen=True)
class Monomial:
    """Leading term coeff * lam**exp; the zero element is (0, inf)."""

    coeff: float
    exp: Exponent

    def is_zero(self) -> bool:
        return self.coeff == 0.0

    def __repr__(self) -> str:  # keeps debugging output short
        return f"({self.coeff:g}, {format_exponent(self.exp)})"


ZERO = Monomial(0.0, INF)
ONE = Monomial(1.0, Fraction(0))


def monomial(coeff: float, exp: Exponent) -> Monomial:
    """Validating constructor.  coeff == 0 normalizes to the zero element."""
    coeff = float(coeff)
    if math.isnan(coeff) or math.isinf(coeff):
        raise ValueError(f"monomial coefficient must be finite, got {coeff!r}")
    if coeff < 0.0:
        raise ValueError(f"monomial coefficient must be >= 0, got {coeff!r}")
    if coeff == 0.0:
        return ZERO
    if isinstance(exp, int):
        exp = Fraction(exp)
    if not isinstance(exp, Fraction):
        # math.inf is only legal together with a zero coefficient
        raise ValueError(f"nonzero monomial needs a finite rational exponent, got {exp!r}")
    return Monomial(coeff, exp)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    """Product: coefficients multiply, exponents add.  Zero is annihilating."""
    if a.is_zero() or b.is_zero():
        return ZERO
    return Monomial(a.coeff * b.coeff, a.exp + b.exp)


def mono_add(a: Monomial, b: Monomial) -> Monomial:
    """Leading-order sum: the smaller exponent wins; ties sum coefficients."""
    if a.exp < b.exp:
        return a
    if b.exp < a.exp:
        return b
    if a.is_zero():  # both zero
        return ZERO
    return Monomial(a.coeff + b.coeff, a.exp)


def mono_div(a: Monomial, b: Monomial) -> Monomial:
    """Quotient a/b; b must be nonzero.  Exponents may go negative here —
    that only ever happens transiently inside measure normalization."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero monomial")
    if a.is_zero():
        return ZERO
    return Monomial(a.coeff / b.coeff, a.exp - b.exp)


def mono_limit(a: Monomial) -> float:
    """lim_{lam -> 0+} of the monomial: coeff at exponent 0, 0 beyond, error below."""
    if a.is_zero():
        return 0.0
    if a.exp < 0:
        raise ValueError(f"monomial {a!r} diverges as lam -> 0")
    if a.exp == 0:
        return a.coeff
    return 0.0


def mono_eval(a: Monomial, lam: float) -> float:
    """Numeric value coeff * lam**exp at a concrete lam in (0, 1]."""
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"lam must lie in (0, 1], got {lam!r}")
    if a.is_zero():
        return 0.0
    if a.exp == 0:
        return a.coeff
    return a.coeff * lam ** float(a.exp)


def mono_close(a: Monomial, b: Monomial, rtol: float = COEFF_RTOL) -> bool:
    """Equality up to coefficient noise: exponents exact, coefficients within rtol."""
    if a.is_zero() and b.is_zero():
        return True
    if a.exp != b.exp:
        return False
    scale = max(abs(a.coeff), abs(b.coeff))
    return abs(a.coeff - b.coeff) <= rtol * scale


def mono_sum(terms) -> Monomial:
    """mono_add-fold of an iterable (empty sum is zero)."""
    acc = ZERO
    for t in terms:
        acc = mono_add(acc, t)
    return acc
