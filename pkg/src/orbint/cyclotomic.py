"""Exact arithmetic in the cyclotomic fields Q(zeta_{p^M}).

Integrals of p-power-order characters against rational weights are exact
elements of Q(zeta_{p^M}).  A :class:`CycValue` stores rational coordinates
on the power basis {zeta^e : 0 <= e < phi(p^M)} and keeps itself in a
canonical minimal form (smallest M representing the value, rationals held
prime-free), so structural equality is mathematical equality and verdicts
are bit-exact.

The one relation used for reduction is the cyclotomic polynomial
Phi_{p^M}(X) = sum_j X^(j*p^(M-1)), i.e. for t < p^(M-1):

    zeta^(phi(p^M) + t) = -(zeta^t + zeta^(p^(M-1)+t) + ... + zeta^((p-2)p^(M-1)+t))
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import mpmath

from .errors import MixedPrimes
from .padic import Angle


def _phi(p: int, M: int) -> int:
    return (p - 1) * p ** (M - 1)


def _reduce_exp_into(coeffs: list[Fraction], e: int, c: Fraction, p: int, M: int) -> None:
    """Add c * zeta^e (0 <= e < p^M) into power-basis coordinates in place."""
    phi = _phi(p, M)
    if e < phi:
        coeffs[e] += c
        return
    t = e - phi  # < p^(M-1) because e < p^M
    step = p ** (M - 1)
    for j in range(p - 1):
        coeffs[j * step + t] -= c
    return


class CycValue:
    """An exact element of some Q(zeta_{p^M}) (rationals when M == 0).

    Immutable; always canonical: the stored M is minimal and purely rational
    values carry p = None, M = 0.
    """

    __slots__ = ("p", "M", "coeffs")

    def __init__(self, p: int | None, M: int, coeffs: tuple[Fraction, ...]):
        # run the canonicalization here so every constructed value is canonical
        while M >= 1:
            if M >= 2:
                if all(c == 0 for e, c in enumerate(coeffs) if e % p != 0):
                    coeffs = tuple(coeffs[e] for e in range(0, len(coeffs), p))
                    M -= 1
                    continue
            else:  # M == 1, basis {1, zeta, ..., zeta^(p-2)}
                if all(c == 0 for c in coeffs[1:]):
                    coeffs = (coeffs[0],)
                    p, M = None, 0
            break
        if M == 0:
            p = None
            if len(coeffs) != 1:
                raise ValueError("rational CycValue stores exactly one coefficient")
        elif len(coeffs) != _phi(p, M):
            raise ValueError("coefficient vector has wrong length")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *a):  # immutability guard
        raise AttributeError("CycValue is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def rational(cls, q: Fraction | int) -> "CycValue":
        return cls(None, 0, (Fraction(q),))

    @classmethod
    def zero(cls) -> "CycValue":
        return cls.rational(0)

    @classmethod
    def root_of_unity(cls, angle: Angle) -> "CycValue":
        """exp(2*pi*i*angle) as an exact value."""
        return cyc_accumulate([(angle, Fraction(1))])

    # -- inspection ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.M == 0 and self.coeffs[0] == 0

    @property
    def is_rational(self) -> bool:
        return self.M == 0

    def as_rational(self) -> Fraction:
        if self.M != 0:
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    # -- arithmetic -------------------------------------------------------------

    def _lift(self, p: int, M: int) -> list[Fraction]:
        """Coordinates of self inside Q(zeta_{p^M}) (requires compatible p)."""
        out = [Fraction(0)] * _phi(p, M)
        if self.M == 0:
            out[0] = self.coeffs[0]
            return out
        step = p ** (M - self.M)
        for e, c in enumerate(self.coeffs):
            out[e * step] = c
        return out

    def _common(self, other: "CycValue") -> tuple[int | None, int]:
        if self.M == 0 and other.M == 0:
            return None, 0
        if self.M == 0:
            return other.p, other.M
        if other.M == 0:
            return self.p, self.M
        if self.p != other.p:
            raise MixedPrimes(
                f"cyclotomic primes differ: {self.p} vs {other.p}"
            )
        return self.p, max(self.M, other.M)

    def __add__(self, other) -> "CycValue":
        if isinstance(other, (int, Fraction)):
            other = CycValue.rational(other)
        if not isinstance(other, CycValue):
            return NotImplemented
        p, M = self._common(other)
        if M == 0:
            return CycValue.rational(self.coeffs[0] + other.coeffs[0])
        a = self._lift(p, M)
        b = other._lift(p, M)
        return CycValue(p, M, tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self) -> "CycValue":
        return CycValue(self.p, self.M, tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "CycValue":
        if isinstance(other, (int, Fraction)):
            other = CycValue.rational(other)
        if not isinstance(other, CycValue):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "CycValue":
        return (-self) + other

    def __mul__(self, other) -> "CycValue":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CycValue(self.p, self.M, tuple(c * q for c in self.coeffs))
        if not isinstance(other, CycValue):
            return NotImplemented
        p, M = self._common(other)
        if M == 0:
            return CycValue.rational(self.coeffs[0] * other.coeffs[0])
        a = self._lift(p, M)
        b = other._lift(p, M)
        pM = p**M
        # multiply in the group algebra of Z/p^M, then reduce into the basis
        prod: dict[int, Fraction] = {}
        for e1, c1 in enumerate(a):
            if c1 == 0:
                continue
            for e2, c2 in enumerate(b):
                if c2 == 0:
                    continue
                e = (e1 + e2) % pM
                prod[e] = prod.get(e, Fraction(0)) + c1 * c2
        out = [Fraction(0)] * _phi(p, M)
        for e, c in prod.items():
            if c != 0:
                _reduce_exp_into(out, e, c, p, M)
        return CycValue(p, M, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CycValue":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return CycValue(self.p, self.M, tuple(c / q for c in self.coeffs))
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = CycValue.rational(other)
        if not isinstance(other, CycValue):
            return NotImplemented
        return (self.p, self.M, self.coeffs) == (other.p, other.M, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.p, self.M, self.coeffs))

    # -- rendering ----------------------------------------------------------------

    def __repr__(self) -> str:
        if self.M == 0:
            return f"CycValue({self.coeffs[0]})"
        terms = [
            (f"{c}" if e == 0 else f"({c})*z^{e}")
            for e, c in enumerate(self.coeffs)
            if c != 0
        ]
        return f"CycValue[z=zeta_{self.p}^{self.M}]({' + '.join(terms) or '0'})"

    def describe(self) -> dict:
        """JSON-friendly exact rendering plus a decimal approximation."""
        approx = to_complex(self, 12)
        return {
            "p": self.p,
            "order_exp": self.M,
            "coeffs": [str(c) for c in self.coeffs],
            "approx": [mpmath.nstr(approx.real, 10), mpmath.nstr(approx.imag, 10)],
        }


def cyc_accumulate(terms: Iterable[tuple[Angle, Fraction | int]]) -> CycValue:
    """Sum of rational weights times roots of unity, as an exact CycValue.

    Chooses the smallest cyclotomic order covering every angle; mixing angles
    over different primes raises MixedPrimes.
    """
    p: int | None = None
    M = 0
    staged: list[tuple[Angle, Fraction]] = []
    rational = Fraction(0)
    for angle, w in terms:
        w = Fraction(w)
        if angle.is_zero:
            rational += w
            continue
        if p is None:
            p = angle.p
        elif angle.p != p:
            raise MixedPrimes(f"angle primes differ: {p} vs {angle.p}")
        M = max(M, angle.k)
        staged.append((angle, w))
    if M == 0:
        return CycValue.rational(rational)
    coeffs = [Fraction(0)] * _phi(p, M)
    coeffs[0] += rational
    for angle, w in staged:
        e = angle.num * p ** (M - angle.k)
        _reduce_exp_into(coeffs, e, w, p, M)
    return CycValue(p, M, tuple(coeffs))


def _mpf_fraction(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


def to_complex(value: CycValue, digits: int) -> mpmath.mpc:
    """Canonical complex embedding (zeta_{p^M} -> exp(2*pi*i/p^M)).

    The result is accurate to within 10^-digits of the true embedding.
    """
    with mpmath.workdps(digits + 15):
        if value.M == 0:
            return mpmath.mpc(_mpf_fraction(value.coeffs[0]))
        order = value.p**value.M
        total = mpmath.mpc(0)
        for e, c in enumerate(value.coeffs):
            if c != 0:
                total += _mpf_fraction(c) * mpmath.expjpi(mpmath.mpf(2 * e) / order)
        return total
