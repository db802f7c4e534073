"""Exact reducer for lattice integrals of polynomial character phases.

Computes histograms of

    integral over t in Z_p^V of  prod_j [g_j(t) = 0 mod p^(k_j)]
                                 * psi( sum_t num_t(t) / (den_t(t) * p^(d_t)) ) dt

where nums, dens and constraints are sparse integer polynomials and every
den factor is a unit at each point of the domain.  The result is an exact
map {k mod p^D -> rational weight} with the integral equal to
sum_k weight_k * zeta_{p^D}^k; callers can re-twist the histogram by any
unit (used to amortize one reduction over a whole class of twists).

Reduction operations, applied in priority order:

- normalize: reduce constraint/numerator coefficients, strip p-power
  content, drop trivially-satisfied constraints and integral phase terms,
  and prune boxes where a constraint's constant term is provably too large
  (its valuation is below both the modulus and every variable coefficient).
- eliminate: a variable appearing only — and affinely — in phase numerators
  integrates out to the congruence "its combined coefficient is integral",
  a new constraint.
- solve: a constraint affine in x with a certified-unit coefficient c pins
  x to a coset of p^k Z_p; substituting x = (-h + p^k c s)/c (s a fresh unit
  of volume) stays polynomial because units can be cleared into numerators,
  denominators and constraint multiples.
- branch: enumerate one digit of a variable chosen from the tightest
  constraint and recurse.
- leaf: when the remaining grid is small, enumerate it vectorized and
  histogram the phase numerators.

Termination: eliminations strictly consume variables, solves consume
constraints, branches strictly shrink the remaining grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cyclotomic import CycValue, cyc_accumulate
from .errors import BudgetExceeded
from .measure import DEFAULT_BUDGET
from .padic import Angle
from .poly import Poly

DEFAULT_LEAF_POINTS = 200_000
_CHUNK = 1 << 17


@dataclass
class EngineStats:
    """Count of enumerated lattice points and visited reduction nodes."""

    points: int = 0
    nodes: int = 0


@dataclass(frozen=True)
class _Term:
    num: Poly
    den: tuple[Poly, ...]
    dexp: int


@dataclass
class _State:
    p: int
    terms: list[_Term]
    constraints: list[tuple[Poly, int]]
    weight: Fraction


Histogram = dict[int, Fraction]


def _merge(into: Histogram, other: Histogram) -> None:
    for k, w in other.items():
        into[k] = into.get(k, Fraction(0)) + w


def _unit_certified(c: Poly, p: int) -> bool:
    """True when c is syntactically a unit on Z_p^V: unit constant, all
    variable coefficients divisible by p."""
    if c.constant_term() % p == 0:
        return False
    return all(
        coeff % p == 0 for mono, coeff in c.terms.items() if mono
    )


def _subst_solved(q: Poly, x: int, X: Poly, c: Poly) -> tuple[Poly, int]:
    """Substitute x -> X/c into q; returns (c^deg * q(X/c), deg)."""
    d = q.degree_in(x)
    if d == 0:
        return q, 0
    # q = sum_i q_i x^i  ->  sum_i q_i X^i c^(d-i)
    buckets: dict[int, Poly] = {}
    for mono, coeff in q.terms.items():
        e = 0
        rest = []
        for v, ee in mono:
            if v == x:
                e = ee
            else:
                rest.append((v, ee))
        part = Poly({tuple(rest): coeff})
        buckets[e] = buckets.get(e, Poly()) + part
    out = Poly()
    X_pow = {0: Poly.const(1)}
    c_pow = {0: Poly.const(1)}
    for e, part in buckets.items():
        if e not in X_pow:
            X_pow[e] = X**e
        if d - e not in c_pow:
            c_pow[d - e] = c ** (d - e)
        out = out + part * X_pow[e] * c_pow[d - e]
    return out, d


@lru_cache(maxsize=64)
def _inverse_table(p: int, k: int) -> np.ndarray:
    """inv[v] = v^{-1} mod p^k for units v (0 elsewhere), as int64."""
    m = p**k
    exponent = (p - 1) * p ** (k - 1) - 1  # Euler
    base = np.arange(m, dtype=np.int64)
    result = np.ones(m, dtype=np.int64)
    b = base.copy()
    e = exponent
    while e:
        if e & 1:
            result = (result * b) % m
        b = (b * b) % m
        e >>= 1
    result[base % p == 0] = 0
    return result


class _Reducer:
    def __init__(
        self,
        p: int,
        D: int,
        budget: int,
        leaf_points: int,
        stats: EngineStats,
    ):
        self.p = p
        self.D = D
        self.budget = budget
        self.leaf_points = leaf_points
        self.stats = stats

    # -- normalization ------------------------------------------------------

    def _normalize(self, st: _State) -> bool:
        """Canonicalize in place; returns False when the box contributes 0."""
        p = self.p
        new_constraints: list[tuple[Poly, int]] = []
        for g, k in st.constraints:
            g = g.reduce_mod(p**k)
            if g.is_zero:
                continue
            v = g.content_val(p, k)
            if v >= k:
                continue
            if v > 0:
                g, k = g.divexact_p(p, v), k - v
            c0 = g.constant_term()
            varmin = min(
                (
                    _coeff_val(coeff, p, k)
                    for mono, coeff in g.terms.items()
                    if mono
                ),
                default=k,
            )
            if c0 % p**k != 0:
                v0 = _coeff_val(c0, p, k)
                if v0 < min(varmin, k) and varmin > v0:
                    return False  # value pinned at valuation v0 < k
            if g.is_constant:
                if g.const_value() % p**k != 0:
                    return False
                continue
            new_constraints.append((g, k))
        st.constraints = new_constraints

        new_terms: list[_Term] = []
        for t in st.terms:
            dexp = t.dexp
            if dexp <= 0:
                continue
            num = t.num.reduce_mod(p**dexp)
            if num.is_zero:
                continue
            v = num.content_val(p, dexp)
            if v >= dexp:
                continue
            if v > 0:
                num, dexp = num.divexact_p(p, v), dexp - v
            den: list[Poly] = []
            for f in t.den:
                f = f.reduce_mod(p**dexp)
                if f.is_constant:
                    num = (num * pow(f.const_value(), -1, p**dexp)).reduce_mod(
                        p**dexp
                    )
                else:
                    den.append(f)
            new_terms.append(_Term(num, tuple(den), dexp))
        st.terms = new_terms
        return True

    # -- operation selection ----------------------------------------------------

    def _find_eliminable(self, st: _State) -> int | None:
        blocked: set[int] = set()
        for g, _ in st.constraints:
            blocked |= g.variables()
        for t in st.terms:
            for f in t.den:
                blocked |= f.variables()
        candidates: set[int] = set()
        for t in st.terms:
            candidates |= t.num.variables()
        candidates -= blocked
        for x in sorted(candidates):
            if all(t.num.degree_in(x) <= 1 for t in st.terms):
                return x
        return None

    def _eliminate(self, st: _State, x: int) -> None:
        involved = [t for t in st.terms if x in t.num.variables()]
        others = [t for t in st.terms if x not in t.num.variables()]
        Dm = max(t.dexp for t in involved)
        num_A = Poly()
        for t in involved:
            P, _ = t.num.split_affine(x)
            scale = self.p ** (Dm - t.dexp)
            prod = P * scale
            for s in involved:
                if s is not t:
                    for f in s.den:
                        prod = prod * f
            num_A = num_A + prod
        new_terms = []
        for t in involved:
            _, Q = t.num.split_affine(x)
            new_terms.append(_Term(Q, t.den, t.dexp))
        st.terms = others + new_terms
        st.constraints = st.constraints + [(num_A, Dm)]

    def _find_solvable(self, st: _State) -> tuple[int, int] | None:
        """Returns (constraint index, variable) for the best solve, if any."""
        best: tuple[int, int, int] | None = None  # (k, idx, var)
        for idx, (g, k) in enumerate(st.constraints):
            for x in sorted(g.variables()):
                if g.degree_in(x) != 1:
                    continue
                c, _ = g.split_affine(x)
                if x in c.variables():
                    continue
                if _unit_certified(c, self.p):
                    if best is None or k < best[0]:
                        best = (k, idx, x)
                    break
        if best is None:
            return None
        return best[1], best[2]

    def _solve(self, st: _State, idx: int, x: int) -> None:
        p = self.p
        g, k = st.constraints[idx]
        c, h = g.split_affine(x)
        # x = (-h + p^k c s)/c with s a fresh variable re-using index x
        X = (-h) + Poly.var(x) * c * p**k
        new_terms: list[_Term] = []
        for t in st.terms:
            num, dnum = _subst_solved(t.num, x, X, c)
            den: list[Poly] = []
            extra_c = 0
            for f in t.den:
                F, df = _subst_solved(f, x, X, c)
                den.append(F)
                extra_c += df
            if extra_c:
                num = num * c**extra_c
            if dnum:
                den.extend([c] * dnum)
            new_terms.append(_Term(num, tuple(den), t.dexp))
        new_constraints: list[tuple[Poly, int]] = []
        for j, (q, kq) in enumerate(st.constraints):
            if j == idx:
                continue
            Q, _ = _subst_solved(q, x, X, c)
            new_constraints.append((Q, kq))
        st.terms = new_terms
        st.constraints = new_constraints
        st.weight /= p**k

    # -- leaves -----------------------------------------------------------------

    def _levels(self, st: _State) -> dict[int, int]:
        p = self.p
        levels: dict[int, int] = {}

        def bump(v: int, lv: int) -> None:
            if lv > levels.get(v, 0):
                levels[v] = lv

        for t in st.terms:
            for v in t.num.variables():
                bump(v, t.dexp - t.num.monomial_min_val(v, p, t.dexp))
            for f in t.den:
                for v in f.variables():
                    bump(v, t.dexp - f.monomial_min_val(v, p, t.dexp))
        for g, k in st.constraints:
            for v in g.variables():
                bump(v, k - g.monomial_min_val(v, p, k))
        return {v: lv for v, lv in levels.items() if lv > 0}

    def _leaf(self, st: _State, levels: dict[int, int]) -> Histogram:
        p, D = self.p, self.D
        vars_sorted = sorted(levels)
        radices = [p ** levels[v] for v in vars_sorted]
        total = 1
        for r in radices:
            total *= r
        if self.stats.points + total > self.budget:
            raise BudgetExceeded(self.stats.points + total, self.budget)
        self.stats.points += total
        point_weight = st.weight / p ** sum(levels.values())
        out_mod = p**D if D > 0 else 1
        if out_mod > 1 << 40:
            raise ValueError("phase modulus too large for vectorized leaves")

        strides = []
        s = 1
        for r in reversed(radices):
            strides.append(s)
            s *= r
        strides.reverse()

        def eval_poly(q: Poly, m: int, coords: dict, shape) -> np.ndarray:
            used = q.variables()
            if not used:
                return np.full(shape, q.constant_term() % m, dtype=np.int64)
            # variables outside the grid have level 0: their contribution is
            # constant mod the relevant modulus, so evaluate them at 0
            arrays = {
                v: (coords[v] % m if v in coords else np.zeros(shape, dtype=np.int64))
                for v in used
            }
            return q.eval_mod_arrays(arrays, m)

        hist_counts = np.zeros(out_mod, dtype=np.int64)
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            coords = {
                v: (idx // st_) % r
                for v, st_, r in zip(vars_sorted, strides, radices)
            }
            mask = np.ones(idx.shape, dtype=bool)
            for g, k in st.constraints:
                mask &= eval_poly(g, p**k, coords, idx.shape) == 0
            if not mask.any():
                continue
            numerator = np.zeros(idx.shape, dtype=np.int64)
            for t in st.terms:
                mt = p**t.dexp
                nv = eval_poly(t.num, mt, coords, idx.shape)
                for f in t.den:
                    fv = eval_poly(f, mt, coords, idx.shape)
                    inv = _inverse_table(p, t.dexp)
                    nv = (nv * inv[fv]) % mt
                numerator = (numerator + nv * p ** (D - t.dexp)) % out_mod
            hist_counts += np.bincount(numerator[mask], minlength=out_mod)
        out: Histogram = {}
        for k in np.nonzero(hist_counts)[0]:
            out[int(k)] = point_weight * int(hist_counts[k])
        return out

    # -- branching -------------------------------------------------------------------

    def _branch_var(self, st: _State, levels: dict[int, int]) -> int:
        if st.constraints:
            kmin = min(k for _, k in st.constraints)
            tight_vars: set[int] = set()
            for g, k in st.constraints:
                if k == kmin:
                    tight_vars |= g.variables() & levels.keys()
            if tight_vars:
                counts = {
                    v: sum(1 for g, _ in st.constraints if v in g.variables())
                    for v in tight_vars
                }
                best = max(counts.values())
                return min(v for v, c in counts.items() if c == best)
        # no useful constraint vars: branch the deepest phase variable
        return max(levels, key=lambda v: (levels[v], -v))

    # -- main recursion ------------------------------------------------------------------

    def reduce(self, st: _State) -> Histogram:
        self.stats.nodes += 1
        if not self._normalize(st):
            return {}
        while True:
            x = self._find_eliminable(st)
            if x is None:
                break
            self._eliminate(st, x)
            if not self._normalize(st):
                return {}
        found = self._find_solvable(st)
        if found is not None:
            self._solve(st, *found)
            return self.reduce(st)
        levels = self._levels(st)
        if not levels:
            # no variable matters: constraints are settled, terms constant
            numerator = 0
            for t in st.terms:
                c = t.num.constant_term()
                for f in t.den:
                    c *= pow(f.constant_term(), -1, self.p**t.dexp)
                numerator += c * self.p ** (self.D - t.dexp)
            numerator %= self.p**self.D if self.D > 0 else 1
            self.stats.points += 1
            if self.stats.points > self.budget:
                raise BudgetExceeded(self.stats.points, self.budget)
            return {numerator: st.weight}
        total = 1
        for lv in levels.values():
            total *= self.p**lv
            if total > self.leaf_points:
                break
        if total <= self.leaf_points:
            return self._leaf(st, levels)
        x = self._branch_var(st, levels)
        out: Histogram = {}
        for d in range(self.p):
            sub = _State(
                p=st.p,
                terms=[
                    _Term(
                        t.num.substitute(x, Poly.var(x) * self.p + d),
                        tuple(
                            f.substitute(x, Poly.var(x) * self.p + d) for f in t.den
                        ),
                        t.dexp,
                    )
                    for t in st.terms
                ],
                constraints=[
                    (g.substitute(x, Poly.var(x) * self.p + d), k)
                    for g, k in st.constraints
                ],
                weight=st.weight / self.p,
            )
            _merge(out, self.reduce(sub))
        return out


def _coeff_val(c: int, p: int, cap: int) -> int:
    v = 0
    while v < cap and c % p == 0:
        c //= p
        v += 1
    return v


def character_lattice_integral(
    p: int,
    denom_exp: int,
    terms: list[tuple[Poly, int]],
    constraints: list[tuple[Poly, int]] | None = None,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
) -> Histogram:
    """Histogram of the phase over the constrained unit lattice.

    terms: (numerator polynomial, denominator exponent d) pairs, the phase
    angle being sum(num / p^d); constraints: (g, k) meaning g = 0 mod p^k.
    All variables range over Z_p.  Returns {residue mod p^denom_exp: weight}.
    """
    if denom_exp < 0:
        raise ValueError("denominator exponent must be >= 0")
    for _, d in terms:
        if d > denom_exp:
            raise ValueError("term denominator exceeds the output grid")
    stats = stats if stats is not None else EngineStats()
    reducer = _Reducer(p, denom_exp, budget, leaf_points, stats)
    st = _State(
        p=p,
        terms=[_Term(num, (), d) for num, d in terms],
        constraints=list(constraints or []),
        weight=Fraction(1),
    )
    return reducer.reduce(st)


def histogram_to_value(hist: Histogram, p: int, denom_exp: int, twist: int = 1) -> CycValue:
    """Exact value sum_k w_k zeta^(k * twist) of a histogram (twist a unit)."""
    if denom_exp == 0:
        total = Fraction(0)
        for w in hist.values():
            total += w
        return CycValue.rational(total)
    return cyc_accumulate(
        (Angle.make(k * twist, denom_exp, p), w) for k, w in hist.items()
    )
