"""Sparse integer polynomials in many variables.

These are the phase numerators and congruence constraints of the lattice
integrator: exact integer coefficients, variables indexed by small ints,
monomials kept sparse.  The class is deliberately minimal — just the
operations the integration engine and the cubic-norm structures need —
and supports evaluation over any commutative ring (ints, Fractions,
p-adics, numpy residue arrays).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .padic import vp

# A monomial is a tuple of (variable, exponent) pairs, sorted by variable,
# with all exponents >= 1.  The empty tuple is the constant monomial.
Mono = tuple[tuple[int, int], ...]


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    exps: dict[int, int] = dict(m1)
    for v, e in m2:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


class Poly:
    """Immutable sparse polynomial with integer coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, int] | None = None):
        cleaned = {m: int(c) for m, c in (terms or {}).items() if c != 0}
        object.__setattr__(self, "terms", cleaned)

    def __setattr__(self, *a):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def const(cls, c: int) -> "Poly":
        return cls({(): c} if c else {})

    @classmethod
    def var(cls, i: int, coeff: int = 1, exp: int = 1) -> "Poly":
        return cls({((i, exp),): coeff})

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def const_value(self) -> int:
        """The value of a constant polynomial (0 for the zero poly)."""
        if not self.is_constant:
            raise ValueError(f"{self!r} is not constant")
        return self.terms.get((), 0)

    def variables(self) -> set[int]:
        return {v for m in self.terms for v, _ in m}

    def degree_in(self, var: int) -> int:
        deg = 0
        for m in self.terms:
            for v, e in m:
                if v == var:
                    deg = max(deg, e)
        return deg

    def constant_term(self) -> int:
        return self.terms.get((), 0)

    def content_val(self, p: int, cap: int) -> int:
        """min_p-valuation over coefficients, capped (cap for the zero poly)."""
        best = cap
        for c in self.terms.values():
            v = 0
            while v < best and c % p == 0:
                c //= p
                v += 1
            best = min(best, v)
            if best == 0:
                return 0
        return best

    def monomial_min_val(self, var: int, p: int, cap: int) -> int:
        """min valuation of coefficients among monomials containing var."""
        best = cap
        for m, c in self.terms.items():
            if any(v == var for v, _ in m):
                w = 0
                while w < best and c % p == 0:
                    c //= p
                    w += 1
                best = min(best, w)
                if best == 0:
                    return 0
        return best

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "Poly":
        if isinstance(other, int):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        if isinstance(other, int):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if isinstance(other, int):
            if other == 0:
                return Poly()
            return Poly({m: c * other for m, c in self.terms.items()})
        if not isinstance(other, Poly):
            return NotImplemented
        out: dict[Mono, int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        for _ in range(e):
            out = out * self
        return out

    def map_coeffs(self, f: Callable[[int], int]) -> "Poly":
        return Poly({m: f(c) for m, c in self.terms.items()})

    def reduce_mod(self, modulus: int) -> "Poly":
        return Poly({m: c % modulus for m, c in self.terms.items()})

    def divexact_p(self, p: int, v: int) -> "Poly":
        """Divide every coefficient by p^v (coefficients must allow it)."""
        d = p**v
        out = {}
        for m, c in self.terms.items():
            if c % d:
                raise ValueError("coefficient not divisible")
            out[m] = c // d
        return Poly(out)

    # -- substitution -------------------------------------------------------------

    def substitute(self, var: int, replacement: "Poly") -> "Poly":
        """Replace a variable by a polynomial."""
        untouched: dict[Mono, int] = {}
        powers: dict[int, Poly] = {0: Poly.const(1), 1: replacement}
        out = Poly()
        for m, c in self.terms.items():
            e_var = 0
            rest = []
            for v, e in m:
                if v == var:
                    e_var = e
                else:
                    rest.append((v, e))
            if e_var == 0:
                untouched[m] = untouched.get(m, 0) + c
                continue
            if e_var not in powers:
                powers[e_var] = replacement**e_var
            out = out + powers[e_var] * Poly({tuple(rest): c})
        return out + Poly(untouched)

    def rename_vars(self, mapping: Mapping[int, int]) -> "Poly":
        out: dict[Mono, int] = {}
        for m, c in self.terms.items():
            nm = tuple(sorted((mapping.get(v, v), e) for v, e in m))
            if len({v for v, _ in nm}) != len(nm):
                raise ValueError("rename collides variables")
            out[nm] = out.get(nm, 0) + c
        return Poly(out)

    def split_affine(self, var: int) -> tuple["Poly", "Poly"]:
        """Write self = P*var + Q for a variable of degree <= 1."""
        P: dict[Mono, int] = {}
        Q: dict[Mono, int] = {}
        for m, c in self.terms.items():
            hit = [e for v, e in m if v == var]
            if not hit:
                Q[m] = c
            elif hit[0] == 1:
                P[tuple((v, e) for v, e in m if v != var)] = c
            else:
                raise ValueError(f"degree in x_{var} exceeds 1")
        return Poly(P), Poly(Q)

    def derivative(self, var: int) -> "Poly":
        out: dict[Mono, int] = {}
        for m, c in self.terms.items():
            for v, e in m:
                if v == var:
                    key = tuple(
                        (w, f - 1 if w == var else f)
                        for w, f in m
                        if not (w == var and f == 1)
                    )
                    out[key] = out.get(key, 0) + c * e
        return Poly(out)

    # -- evaluation -------------------------------------------------------------

    def eval_int(self, point: Sequence[int] | Mapping[int, int]) -> int:
        get = point.__getitem__
        total = 0
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t *= get(v) ** e
            total += t
        return total

    def eval_exact(self, point: Sequence[Fraction] | Mapping[int, Fraction]) -> Fraction:
        get = point.__getitem__
        total = Fraction(0)
        for m, c in self.terms.items():
            t = Fraction(c)
            for v, e in m:
                t *= Fraction(get(v)) ** e
            total += t
        return total

    def eval_ring(self, point, const):
        """Evaluate over an arbitrary commutative ring.

        point: var -> ring element (indexable); const: int -> ring element.
        """
        get = point.__getitem__
        total = None
        for m, c in self.terms.items():
            t = const(c)
            for v, e in m:
                x = get(v)
                for _ in range(e):
                    t = t * x
            total = t if total is None else total + t
        return const(0) if total is None else total

    def eval_mod_arrays(self, arrays: Mapping[int, np.ndarray], mod: int) -> np.ndarray:
        """Vectorized evaluation mod `mod` over int64 residue arrays.

        Every input array must already be reduced mod `mod`, and mod**2 must
        fit in int64; intermediate products are reduced after each multiply.
        """
        shape = next(iter(arrays.values())).shape if arrays else ()
        total = np.zeros(shape, dtype=np.int64)
        for m, c in self.terms.items():
            t = np.full(shape, c % mod, dtype=np.int64)
            for v, e in m:
                x = arrays[v]
                for _ in range(e):
                    t = (t * x) % mod
            total = (total + t) % mod
        return total

    # -- misc ----------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.is_constant and self.const_value() == other
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(
                f"x{v}" if e == 1 else f"x{v}^{e}" for v, e in m
            )
            bits.append(f"{c}" if not m else (f"{c}*{mono}" if c != 1 else mono))
        return " + ".join(bits)


def poly_gcd_content(polys: Iterable[Poly], p: int, cap: int) -> int:
    """min p-valuation across all coefficients of several polynomials."""
    best = cap
    for q in polys:
        best = min(best, q.content_val(p, best))
        if best == 0:
            return 0
    return best


def fraction_poly_to_int(poly_terms: Mapping[Mono, Fraction], p: int) -> tuple[Poly, int]:
    """Clear a p-power denominator: returns (integer poly F, e) with input = F / p^e.

    Coefficient denominators must be pure powers of p.
    """
    e = 0
    for c in poly_terms.values():
        den = Fraction(c).denominator
        v = vp(den, p) if den > 1 else 0
        if p**v != den:
            raise ValueError("coefficient denominator is not a power of p")
        e = max(e, v)
    scale = p**e
    out = {}
    for m, c in poly_terms.items():
        q = Fraction(c) * scale
        assert q.denominator == 1
        out[m] = int(q)
    return Poly(out), e
