"""Exact p-adic scalars, the additive character, and unit representatives.

A :class:`PAdic` is a residue class ``p^v * u  (mod p^(v+M))``: the element is
known exactly on the digits it carries and unknown beyond them.  Operations
propagate precision pessimistically and raise :class:`InsufficientPrecision`
rather than silently using digits that were never represented.  The
distinguished zero-at-precision ``O(p^N)`` records only that the element is
divisible by ``p^N``.

The additive character ``psi`` is normalized so that ``psi(1/p^k)`` is the
angle ``1/p^k`` of the unit circle: it is trivial on the integers and
``psi(x) = exp(2*pi*i*{x})`` with ``{x}`` the p-power fractional part.  Its
exact value is an :class:`Angle`, a reduced element of Q/Z with p-power
denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InsufficientPrecision, MixedPrimes

#: Relative precision used by convenience constructors when none is given.
#: Campaign computations never need more than ~12 digits; 24 leaves headroom.
DEFAULT_PRECISION = 24


def vp(n: int, p: int) -> int:
    """Exact p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def fraction_val(q: Fraction | int, p: int) -> int | float:
    """p-adic valuation of an exact rational (+inf for 0)."""
    q = Fraction(q)
    if q == 0:
        return math.inf
    return vp(q.numerator, p) - vp(q.denominator, p)


class PAdic:
    """An element of Q_p carried at finite precision.

    Nonzero elements store ``(p, v, u, M)`` with ``u`` a unit mod ``p^M``
    (``M >= 1``); the value is ``p^v * u`` known mod ``p^(v+M)``.  The zero
    at absolute precision ``N`` stores ``v = None`` and ``M = N``.
    """

    __slots__ = ("p", "_v", "_u", "_M")
    __hash__ = None  # precision-overlap equality is not hash-compatible

    def __init__(self, p: int, v: int | None, u: int, M: int):
        if p < 2:
            raise ValueError(f"p must be a prime >= 2, got {p}")
        self.p = p
        if v is None:  # zero known mod p^M
            self._v = None
            self._u = 0
            self._M = M
        else:
            if M < 1:
                raise ValueError("nonzero element needs at least one digit")
            u %= p**M
            if u % p == 0:
                raise ValueError("mantissa must be a unit")
            self._v = v
            self._u = u
            self._M = M

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        return cls(p, None, 0, precision)

    @classmethod
    def from_int(cls, n: int, p: int, precision: int = DEFAULT_PRECISION) -> "PAdic":
        if n == 0:
            return cls.zero(p, precision)
        v = vp(n, p)
        return cls(p, v, (n // p**v) % p**precision, precision)

    @classmethod
    def from_rational(
        cls, q: Fraction | int, p: int, precision: int = DEFAULT_PRECISION
    ) -> "PAdic":
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, precision)
        vn = vp(q.numerator, p)
        vd = vp(q.denominator, p)
        mod = p**precision
        num_unit = (q.numerator // p**vn) % mod
        den_unit = (q.denominator // p**vd) % mod
        return cls(p, vn - vd, num_unit * pow(den_unit, -1, mod) % mod, precision)

    # -- inspection --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        """True when the element is zero at its carried precision."""
        return self._v is None

    @property
    def valuation(self) -> int | float:
        return math.inf if self._v is None else self._v

    @property
    def precision(self) -> int:
        """Relative precision (digit count) for nonzero, absolute for zero."""
        return self._M

    @property
    def abs_precision(self) -> int:
        """The element is determined mod p^abs_precision."""
        return self._M if self._v is None else self._v + self._M

    def unit_part(self, digits: int | None = None) -> int:
        """The mantissa mod p^digits (defaults to all carried digits)."""
        if self._v is None:
            raise InsufficientPrecision("zero-at-precision has no unit part")
        if digits is None:
            return self._u
        if digits > self._M:
            raise InsufficientPrecision(
                f"need {digits} digits, element carries {self._M}"
            )
        return self._u % self.p**digits

    def residue_class(self, modulus_exp: int) -> Fraction:
        """Exact rational representing this element's class mod p^modulus_exp.

        Raises InsufficientPrecision unless the carried digits pin the class.
        """
        if self.abs_precision < modulus_exp:
            raise InsufficientPrecision(
                f"element known mod p^{self.abs_precision}, "
                f"class mod p^{modulus_exp} requested"
            )
        if self._v is None or self._v >= modulus_exp:
            return Fraction(0)
        digits = modulus_exp - self._v
        return Fraction(self._u % self.p**digits) * Fraction(self.p) ** self._v

    def to_fraction(self) -> Fraction:
        """Exact rational value of the carried digits."""
        if self._v is None:
            return Fraction(0)
        return Fraction(self._u) * Fraction(self.p) ** self._v

    # -- arithmetic ---------------------------------------------------------

    def _check_prime(self, other: "PAdic") -> None:
        if self.p != other.p:
            raise MixedPrimes(f"cannot combine p={self.p} with p={other.p}")

    def _truncate_abs(self, abs_prec: int) -> "PAdic":
        """Forget digits beyond absolute precision abs_prec."""
        if self._v is None:
            return PAdic(self.p, None, 0, min(self._M, abs_prec))
        M = abs_prec - self._v
        if M <= 0:
            return PAdic(self.p, None, 0, abs_prec)
        return PAdic(self.p, self._v, self._u % self.p ** min(M, self._M), min(M, self._M))

    def __add__(self, other: "PAdic") -> "PAdic":
        if not isinstance(other, PAdic):
            return NotImplemented
        self._check_prime(other)
        p = self.p
        abs_prec = min(self.abs_precision, other.abs_precision)
        if self._v is None:
            return other._truncate_abs(abs_prec)
        if other._v is None:
            return self._truncate_abs(abs_prec)
        v = min(self._v, other._v)
        digits = abs_prec - v
        if digits <= 0:
            return PAdic(p, None, 0, abs_prec)
        mod = p**digits
        total = (
            self._u * p ** (self._v - v) + other._u * p ** (other._v - v)
        ) % mod
        if total == 0:
            return PAdic(p, None, 0, abs_prec)
        shift = vp(total, p)
        if shift >= digits:
            return PAdic(p, None, 0, abs_prec)
        return PAdic(p, v + shift, total // p**shift, digits - shift)

    def __neg__(self) -> "PAdic":
        if self._v is None:
            return self
        return PAdic(self.p, self._v, -self._u % self.p**self._M, self._M)

    def __sub__(self, other: "PAdic") -> "PAdic":
        if not isinstance(other, PAdic):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: "PAdic") -> "PAdic":
        if not isinstance(other, PAdic):
            return NotImplemented
        self._check_prime(other)
        p = self.p
        if self._v is None or other._v is None:
            # p^v*u * O(p^N) is zero mod p^(v+N); O(p^N)*O(p^N') mod p^(N+N')
            a = self._M if self._v is None else self._v
            b = other._M if other._v is None else other._v
            return PAdic(p, None, 0, a + b)
        M = min(self._M, other._M)
        return PAdic(p, self._v + other._v, self._u * other._u % p**M, M)

    def invert(self) -> "PAdic":
        if self._v is None:
            raise ZeroDivisionError("cannot invert zero-at-precision")
        p, M = self.p, self._M
        return PAdic(p, -self._v, pow(self._u, -1, p**M), M)

    def shift(self, k: int) -> "PAdic":
        """Multiply by p^k exactly."""
        if self._v is None:
            return PAdic(self.p, None, 0, self._M + k)
        return PAdic(self.p, self._v + k, self._u, self._M)

    def __eq__(self, other) -> bool:
        """Equality on the digits both operands carry."""
        if not isinstance(other, PAdic):
            return NotImplemented
        if self.p != other.p:
            return False
        shared = min(self.abs_precision, other.abs_precision)
        return self.residue_class(shared) == other.residue_class(shared)

    def __repr__(self) -> str:
        if self._v is None:
            return f"O({self.p}^{self._M})"
        return f"{self._u}*{self.p}^{self._v} + O({self.p}^{self._v + self._M})"


@dataclass(frozen=True)
class Angle:
    """An element of Q/Z with p-power denominator: the value num / p^k.

    Always stored reduced: either the zero angle (num=0, k=0, p=None) or
    0 < num < p^k with p not dividing num.
    """

    num: int
    k: int
    p: int | None

    def __post_init__(self):
        if self.k == 0:
            if self.num != 0 or self.p is not None:
                raise ValueError("integer angle must be the canonical zero")
        else:
            if self.p is None or not (0 < self.num < self.p**self.k):
                raise ValueError("angle not reduced")
            if self.num % self.p == 0:
                raise ValueError("angle not reduced")

    @classmethod
    def zero(cls) -> "Angle":
        return cls(0, 0, None)

    @classmethod
    def make(cls, num: int, k: int, p: int) -> "Angle":
        """Build num/p^k reduced into canonical form."""
        if k < 0:
            raise ValueError("denominator exponent must be >= 0")
        num %= p**k if k > 0 else 1
        while k > 0 and num % p == 0:
            num //= p
            k -= 1
        if k == 0 or num == 0:
            return cls.zero()
        return cls(num, k, p)

    @property
    def is_zero(self) -> bool:
        return self.k == 0

    def value(self) -> Fraction:
        """Representative in [0, 1)."""
        return Fraction(self.num, self.p**self.k) if self.k else Fraction(0)

    def __add__(self, other: "Angle") -> "Angle":
        if not isinstance(other, Angle):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.p != other.p:
            raise MixedPrimes(f"angle primes differ: {self.p} vs {other.p}")
        k = max(self.k, other.k)
        p = self.p
        return Angle.make(
            self.num * p ** (k - self.k) + other.num * p ** (k - other.k), k, p
        )

    def __neg__(self) -> "Angle":
        if self.is_zero:
            return self
        return Angle(self.p**self.k - self.num, self.k, self.p)

    def times(self, n: int) -> "Angle":
        """The angle scaled by an integer."""
        if self.is_zero:
            return self
        return Angle.make(self.num * n, self.k, self.p)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Angle(0)"
        return f"Angle({self.num}/{self.p}^{self.k})"


def val(x: PAdic) -> int | float:
    """p-adic valuation; +inf for the distinguished zero."""
    return x.valuation


def psi(x: PAdic) -> Angle:
    """Exact angle of the standard additive character at x.

    Trivial on Z_p.  For valuation -k < 0 the angle is determined by the k
    lowest mantissa digits, which the element must carry.
    """
    if x.is_zero:
        return Angle.zero()
    v = x._v
    if v >= 0:
        return Angle.zero()
    k = -v
    return Angle.make(x.unit_part(k), k, x.p)


def psi_fraction(q: Fraction | int, p: int) -> Angle:
    """psi of an exact rational with p-power denominator part."""
    q = Fraction(q)
    if q == 0:
        return Angle.zero()
    k = vp(q.denominator, p)
    if k == 0:
        return Angle.zero()
    pk = p**k
    rest = q.denominator // pk
    # q = n / (rest * p^k); the angle keeps only the p-part: n * rest^{-1} / p^k
    num = q.numerator * pow(rest, -1, pk) % pk
    return Angle.make(num, k, p)


def unit_reps(p: int, r: int) -> list[int]:
    """All unit representatives mod p^r, ascending.

    Requires r >= 1; the returned list has p^(r-1) * (p-1) entries.
    """
    if r < 1:
        raise ValueError("unit_reps requires r >= 1")
    return [x for x in range(1, p**r) if x % p != 0]
