"""Degree-3 Jordan algebras presented as cubic norm structures.

A structure is generated from two pieces of data: an integer-coefficient
cubic form ``N`` in ``n`` variables and a base point ``I`` with
``N(I) = 1``.  Everything else is derived:

* trace linear form  ``tr(x) = DN(I)[x]`` (gradient at the base point),
* bilinear pairing   ``T(x, y) = tr(x) tr(y) - D^2 N(I)[x, y]``,
* adjoint            ``x# = T^{-1} grad N(x)``, a tuple of quadratic forms,

which satisfy ``T(x#, y) = DN(x)[y]``, ``(x#)# = N(x) x``,
``T(x#, x) = 3 N(x)`` and ``I# = I``.

Six concrete instances are exposed through :func:`model_algebra`:

==== ======================================== ====
id   algebra                                  dim
==== ======================================== ====
1    3x3 matrices, N = det                    9
2    F + 4x4 alternating, N = b Pf            7
3    6x6 alternating, N = Pf                  15
4    3x3 Hermitian over split octonions       27
5    same as 3 with a hyperbolic base point   15
6    same as 2 (root-space labels)            7
==== ======================================== ====

Models 5 and 6 use base points adapted to the root-space coordinates the
orbital integrals are written in, so their trace forms differ from their
family-A twins even though the underlying algebras are isomorphic.
"""

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .octonion import oct_conj, oct_mul, oct_norm, oct_trace
from .padic import PAdic, DEFAULT_PRECISION
from .poly import Mono, Poly


def _fraction_inverse(mat: list[list[int]]) -> list[list[Fraction]]:
    """Exact inverse of a square integer matrix by Gauss-Jordan."""
    n = len(mat)
    a = [[Fraction(mat[i][j]) for j in range(n)] for i in range(n)]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("trace pairing is degenerate")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        scale = a[col][col]
        a[col] = [v / scale for v in a[col]]
        inv[col] = [v / scale for v in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
                inv[r] = [v - f * w for v, w in zip(inv[r], inv[col])]
    return inv


def _combine_integral(rows: Sequence[Sequence[Fraction]], polys: Sequence[Poly]) -> list[Poly]:
    """Rational linear combinations of integer polynomials, which must land
    back in integer polynomials."""
    out = []
    for row in rows:
        acc: dict[Mono, Fraction] = {}
        for c, poly in zip(row, polys):
            if c == 0:
                continue
            for m, v in poly.terms.items():
                acc[m] = acc.get(m, Fraction(0)) + c * v
        terms = {}
        for m, v in acc.items():
            if v == 0:
                continue
            if v.denominator != 1:
                raise ValueError("adjoint map is not integral")
            terms[m] = v.numerator
        out.append(Poly(terms))
    return out


class CubicNorm:
    """Cubic norm structure derived from (N, I)."""

    def __init__(self, dim: int, norm: Poly, identity: Sequence[int]):
        if norm.eval_int(identity) != 1:
            raise ValueError("base point must have norm 1")
        self.dim = dim
        self.norm_poly = norm
        self.identity = tuple(identity)
        grads = [norm.derivative(i) for i in range(dim)]
        self.trace_vec = tuple(g.eval_int(identity) for g in grads)
        hess = [
            [grads[i].derivative(j).eval_int(identity) for j in range(dim)]
            for i in range(dim)
        ]
        self.pair_matrix = [
            [self.trace_vec[i] * self.trace_vec[j] - hess[i][j] for j in range(dim)]
            for i in range(dim)
        ]
        inv = _fraction_inverse(self.pair_matrix)
        self.sharp_polys = tuple(_combine_integral(inv, grads))
        if sum(self.trace_vec[i] * self.identity[i] for i in range(dim)) != 3:
            raise ValueError("base point must have trace 3")
        if tuple(q.eval_int(identity) for q in self.sharp_polys) != self.identity:
            raise ValueError("base point must be its own adjoint")

    # -- evaluation over any coordinate ring -----------------------------------

    def _eval(self, poly: Poly, x: Sequence):
        first = x[0]
        if isinstance(first, PAdic):
            p, m = first.p, DEFAULT_PRECISION
            return poly.eval_ring(x, lambda c: PAdic.from_int(c, p, m))
        if isinstance(first, Fraction):
            return poly.eval_exact(x)
        return poly.eval_int(x)

    def norm(self, x: Sequence):
        return self._eval(self.norm_poly, x)

    def trace(self, x: Sequence):
        out = None
        for c, v in zip(self.trace_vec, x):
            if c == 0:
                continue
            term = v * c
            out = term if out is None else out + term
        return out if out is not None else 0

    def sharp(self, x: Sequence) -> tuple:
        return tuple(self._eval(q, x) for q in self.sharp_polys)

    def pair(self, x: Sequence, y: Sequence):
        out = None
        for i in range(self.dim):
            row = self.pair_matrix[i]
            for j in range(self.dim):
                c = row[j]
                if c == 0:
                    continue
                term = x[i] * y[j] * c
                out = term if out is None else out + term
        return out if out is not None else 0


@dataclass(frozen=True)
class JordanElement:
    """An element of a fixed cubic norm structure."""

    algebra: "ModelAlgebra"
    coords: tuple

    def norm(self):
        return self.algebra.cubic.norm(self.coords)

    def trace(self):
        return self.algebra.cubic.trace(self.coords)

    def sharp(self) -> "JordanElement":
        return JordanElement(self.algebra, self.algebra.cubic.sharp(self.coords))

    def pair(self, other: "JordanElement"):
        return self.algebra.cubic.pair(self.coords, other.coords)


@dataclass(frozen=True)
class ModelAlgebra:
    model: int
    family: str
    name: str
    dim: int
    labels: tuple
    cubic: CubicNorm

    def element(self, coords) -> JordanElement:
        return JordanElement(self, tuple(coords))

    def structure_json(self) -> str:
        """Audit dump: basis labels, trace vector, N and sharp as sparse forms."""

        def sparse(poly: Poly):
            return [
                {"monomial": [[v, e] for v, e in mono], "coeff": c}
                for mono, c in sorted(poly.terms.items())
            ]

        doc = {
            "schema": "orbint-cubic-norm/1",
            "model": self.model,
            "family": self.family,
            "name": self.name,
            "dim": self.dim,
            "basis": list(self.labels),
            "identity": list(self.cubic.identity),
            "trace": list(self.cubic.trace_vec),
            "norm": sparse(self.cubic.norm_poly),
            "sharp": [sparse(q) for q in self.cubic.sharp_polys],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


# -- model construction ---------------------------------------------------------


def _det3() -> tuple[Poly, tuple, tuple]:
    # coordinates a_ij row-major: var 3*i + j
    n = Poly()
    for perm in itertools.permutations(range(3)):
        sign = 1
        for i in range(3):
            for j in range(i + 1, 3):
                if perm[i] > perm[j]:
                    sign = -sign
        term = Poly.const(sign)
        for i in range(3):
            term = term * Poly.var(3 * i + perm[i])
        n = n + term
    identity = tuple(1 if i in (0, 4, 8) else 0 for i in range(9))
    labels = tuple(f"a{i+1}{j+1}" for i in range(3) for j in range(3))
    return n, identity, labels


def _matching_sign(pairs: tuple) -> int:
    flat = [k for pair in pairs for k in pair]
    sign = 1
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            if flat[i] > flat[j]:
                sign = -sign
    return sign


def _perfect_matchings(indices: tuple) -> list[tuple]:
    if not indices:
        return [()]
    first, rest = indices[0], indices[1:]
    out = []
    for k, second in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for sub in _perfect_matchings(remaining):
            out.append(((first, second),) + sub)
    return out


def _pfaffian6(var_of_pair) -> Poly:
    n = Poly()
    for matching in _perfect_matchings((1, 2, 3, 4, 5, 6)):
        term = Poly.const(_matching_sign(matching))
        for i, j in matching:
            term = term * Poly.var(var_of_pair(i, j))
        n = n + term
    return n


def _asym6_plain() -> tuple[Poly, tuple, tuple]:
    pairs = [(i, j) for i in range(1, 7) for j in range(i + 1, 7)]
    index = {pair: k for k, pair in enumerate(pairs)}
    n = _pfaffian6(lambda i, j: index[(i, j)])
    identity = [0] * 15
    for pair in [(1, 2), (3, 4), (5, 6)]:
        identity[index[pair]] = 1
    labels = tuple(f"x{i}{j}" for i, j in pairs)
    return n, tuple(identity), labels


def _asym6_roots() -> tuple[Poly, tuple, tuple]:
    # coordinates A_1..A_5 (columns against index 6), then A_ij for i<j<=5
    pairs = [(i, j) for i in range(1, 6) for j in range(i + 1, 6)]
    pair_index = {pair: 5 + k for k, pair in enumerate(pairs)}

    def var_of(i, j):
        if j == 6:
            return i - 1
        return pair_index[(i, j)]

    n = _pfaffian6(var_of)
    identity = [0] * 15
    identity[var_of(1, 6)] = 1
    identity[var_of(2, 5)] = 1
    identity[var_of(3, 4)] = 1
    labels = tuple(f"A{i}" for i in range(1, 6)) + tuple(f"A{i}{j}" for i, j in pairs)
    return n, tuple(identity), labels


def _spin_factor() -> tuple[Poly, tuple, tuple]:
    # coordinates (b, A1, A2, A3, A12, A13, A23); N = b * Pf of the 4x4
    # alternating matrix with x_i4 = A_i, x_ij = A_ij
    b, a1, a2, a3, a12, a13, a23 = (Poly.var(i) for i in range(7))
    pf = a1 * a23 - a2 * a13 + a3 * a12
    n = b * pf
    identity = (1, 1, 0, 0, 0, 0, 1)
    labels = ("b", "A1", "A2", "A3", "A12", "A13", "A23")
    return n, identity, labels


def _herm3_octonion() -> tuple[Poly, tuple, tuple]:
    # coordinates: c1, c2, c3, then the three off-diagonal octonions
    # x1 (vars 3..10), x2 (11..18), x3 (19..26) in Zorn coordinates
    c = [Poly.var(i) for i in range(3)]
    x = [tuple(Poly.var(3 + 8 * k + i) for i in range(8)) for k in range(3)]
    n = c[0] * c[1] * c[2]
    for k in range(3):
        n = n - c[k] * oct_norm(x[k])
    n = n + oct_trace(oct_mul(oct_mul(x[0], x[1]), x[2]))
    identity = tuple(1 if i < 3 else 0 for i in range(27))
    labels = ("c1", "c2", "c3") + tuple(
        f"x{k+1}_{part}" for k in range(3) for part in ("a", "v1", "v2", "v3", "b", "w1", "w2", "w3")
    )
    return n, identity, labels


_MODEL_TABLE = {
    1: ("A", "3x3 matrices", _det3),
    2: ("A", "F + alternating 4x4", _spin_factor),
    3: ("A", "alternating 6x6", _asym6_plain),
    4: ("A", "Hermitian 3x3 over split octonions", _herm3_octonion),
    5: ("B", "alternating 6x6, root basis", _asym6_roots),
    6: ("B", "F + alternating 4x4, root basis", _spin_factor),
}

_CACHE: dict[int, ModelAlgebra] = {}


def model_algebra(model: int) -> ModelAlgebra:
    """The cubic norm structure of one of the six models."""
    if model not in _MODEL_TABLE:
        raise ValueError(f"unknown model id {model}")
    if model not in _CACHE:
        family, name, build = _MODEL_TABLE[model]
        norm, identity, labels = build()
        cubic = CubicNorm(len(identity), norm, identity)
        _CACHE[model] = ModelAlgebra(model, family, name, len(identity), labels, cubic)
    return _CACHE[model]
