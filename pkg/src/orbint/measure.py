"""Exact integration of character phases against cell functions.

The integrator is deliberately brute force: it refines every cell to the
declared oscillation level of the phase, sums exact roots of unity with
rational weights, and never approximates.  It is the reference every fast
path is tested against.

A *phase* is any object with:

- ``p``: the prime,
- ``levels(n)``: per-coordinate levels ``L_i`` such that the angle (and the
  optional weight) are constant on cosets ``x + p^(L_i)`` inside any cell it
  will be integrated over,
- ``angle_at(point)``: exact :class:`Angle` at a rational point,

and optionally ``weight_at(point)`` (exact rational factor, default 1) and
``affine_split(coord)`` (exact affine data, required by
:func:`eliminate_linear`).

Normalization: ``vol(Z_p^n) = 1``.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .cells import Cell, CellFunction
from .cyclotomic import CycValue, cyc_accumulate
from .errors import (
    BudgetExceeded,
    InsufficientPrecision,
    NotAffine,
    UnstableRefinement,
)
from .padic import Angle, PAdic, fraction_val, psi_fraction
from .poly import Poly

#: Hard cap on enumerated lattice points unless the caller lowers it.
DEFAULT_BUDGET = 10**9

#: Chunk size for the vectorized enumeration path.
_CHUNK = 1 << 18


@runtime_checkable
class PhaseSpec(Protocol):
    p: int

    def levels(self, n: int) -> tuple[int, ...]: ...

    def angle_at(self, point: Sequence[Fraction]) -> Angle: ...


def char_integral(c, m: int, p: int | None = None) -> Fraction:
    """Exact value of the integral of psi(c*x) over p^m * Z_p.

    Equals p^-m when val(c) >= -m and 0 otherwise.  Accepts a PAdic (which
    must carry enough digits to settle the comparison) or an exact rational
    together with the prime.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if isinstance(c, PAdic):
        p = c.p
        if c.is_zero and c.precision < -m:
            # the true valuation could still be anywhere >= precision
            raise InsufficientPrecision(
                f"zero at precision {c.precision} cannot settle val >= {-m}"
            )
        ok = c.valuation >= -m
    else:
        if p is None:
            raise ValueError("p required for rational c")
        ok = fraction_val(Fraction(c), p) >= -m
    return Fraction(1, p**m) if ok else Fraction(0)


class PolyPhase:
    """psi(P(x) / p^D) for an integer polynomial P.

    Valid on cells contained in Z_p^n: the declared level of coordinate i is
    D minus the smallest coefficient valuation among monomials containing i.
    """

    def __init__(self, p: int, poly: Poly, denom_exp: int):
        if denom_exp < 0:
            raise ValueError("denominator exponent must be >= 0")
        self.p = p
        self.poly = poly
        self.D = denom_exp

    def levels(self, n: int) -> tuple[int, ...]:
        out = []
        for i in range(n):
            if self.D == 0:
                out.append(0)
                continue
            v = self.poly.monomial_min_val(i, self.p, self.D)
            out.append(max(0, self.D - v))
        return tuple(out)

    def angle_at(self, point: Sequence[Fraction]) -> Angle:
        value = self.poly.eval_exact([Fraction(x) for x in point])
        return psi_fraction(value / Fraction(self.p) ** self.D, self.p)

    def affine_split(self, coord: int):
        """Exact (coefficient, constant) rational evaluators in coordinate."""
        try:
            P, Q = self.poly.split_affine(coord)
        except ValueError as exc:
            raise NotAffine(str(exc)) from exc
        scale = Fraction(1, self.p**self.D)

        def coeff_at(point) -> Fraction:
            return P.eval_exact([Fraction(x) for x in point]) * scale

        def const_at(point) -> Fraction:
            return Q.eval_exact([Fraction(x) for x in point]) * scale

        return coeff_at, const_at


class CallablePhase:
    """A phase given by an arbitrary exact angle function and declared levels."""

    def __init__(self, p: int, declared_levels: Sequence[int], fn, weight_fn=None):
        self.p = p
        self._levels = tuple(int(x) for x in declared_levels)
        self._fn = fn
        if weight_fn is not None:
            self.weight_at = weight_fn  # type: ignore[method-assign]

    def levels(self, n: int) -> tuple[int, ...]:
        if len(self._levels) != n:
            raise ValueError("declared levels have wrong dimension")
        return self._levels

    def angle_at(self, point: Sequence[Fraction]) -> Angle:
        return self._fn(point)


class KloostermanPhase:
    """psi((x + x^{-1}) / a) in one unit variable, val(a) = -D.

    Defined on cells inside Z_p^x; the inverse is taken exactly through the
    residue mod p^D, which determines the angle.
    """

    def __init__(self, p: int, denom_exp: int, unit: int = 1):
        if denom_exp < 0:
            raise ValueError("denominator exponent must be >= 0")
        self.p = p
        self.D = denom_exp
        self.unit = unit  # a = p^D * unit

    def levels(self, n: int) -> tuple[int, ...]:
        if n != 1:
            raise ValueError("Kloosterman phase is one-dimensional")
        return (self.D,)

    def angle_at(self, point: Sequence[Fraction]) -> Angle:
        if self.D == 0:
            return Angle.zero()
        x = Fraction(point[0])
        pD = self.p**self.D
        if fraction_val(x, self.p) != 0:
            raise ValueError("point must be a unit")
        # residue of x mod p^D (denominator is prime to p on units)
        c = x.numerator * pow(x.denominator, -1, pD) % pD
        u_inv = pow(self.unit, -1, pD)
        return psi_fraction(Fraction((c + pow(c, -1, pD)) * u_inv, pD), self.p)


class FoldedPhase:
    """The phase produced by one linear elimination.

    Evaluates the base phase with the eliminated coordinate frozen at its
    cell center and multiplies in the rational factor
    ``char_integral(affine coefficient, cell level)`` as a per-point weight.
    """

    def __init__(self, base, coord: int, cell_data: list[tuple[Cell, Fraction, int]], extra_levels: tuple[int, ...]):
        self.p = base.p
        self._base = base
        self._coord = coord
        self._cell_data = cell_data  # (reduced cell, center, level) per piece
        self._extra = extra_levels

    def _locate(self, point) -> tuple[Fraction, int]:
        for cell, c, m in self._cell_data:
            if cell.contains(point):
                return c, m
        raise ValueError("point lies outside every folded cell")

    def _embed(self, point, value: Fraction) -> list[Fraction]:
        full = list(point)
        full.insert(self._coord, value)
        return full

    def levels(self, n: int) -> tuple[int, ...]:
        base = list(self._base.levels(n + 1))
        del base[self._coord]
        return tuple(max(b, e) for b, e in zip(base, self._extra))

    def angle_at(self, point: Sequence[Fraction]) -> Angle:
        c, _ = self._locate(point)
        return self._base.angle_at(self._embed(point, c))

    def weight_at(self, point: Sequence[Fraction]) -> Fraction:
        c, m = self._locate(point)
        coeff_at, _ = self._base.affine_split(self._coord)
        w = char_integral(coeff_at(self._embed(point, c)), m, self.p)
        base_weight = getattr(self._base, "weight_at", None)
        if base_weight is not None:
            w *= base_weight(self._embed(point, c))
        return w


def _cell_grid_levels(cell: Cell, phase, bump: int, floor: int) -> list[int]:
    declared = phase.levels(cell.dim) if phase is not None else (0,) * cell.dim
    return [max(m, d, floor) + bump for m, d in zip(cell.levels, declared)]


def _count_points(cells: list[tuple[Cell, list[int]]], p: int) -> int:
    total = 0
    for cell, L in cells:
        total += p ** sum(l - m for l, m in zip(L, cell.levels))
    return total


def _vector_path_ok(f: CellFunction, phase) -> bool:
    if not isinstance(phase, PolyPhase):
        return False
    for cell, _ in f:
        for c in cell.centers:
            if c.denominator != 1:
                return False
    return True


def _integrate_cell_vectorized(
    cell: Cell, value: Fraction, phase: PolyPhase, L: list[int], acc: dict[Angle, Fraction]
) -> None:
    p, D = phase.p, phase.D
    mod = p**D if D > 0 else 1
    radices = [p ** (l - m) for l, m in zip(L, cell.levels)]
    total = 1
    for r in radices:
        total *= r
    weight = value * Fraction(1, p ** sum(L))
    if D == 0:
        acc[Angle.zero()] = acc.get(Angle.zero(), Fraction(0)) + weight * total
        return
    strides = []
    s = 1
    for r in reversed(radices):
        strides.append(s)
        s *= r
    strides.reverse()
    hist = np.zeros(mod, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        arrays = {}
        for i, (r, st) in enumerate(zip(radices, strides)):
            t = (idx // st) % r
            x = (int(cell.centers[i]) + p ** cell.levels[i] * t) % mod
            arrays[i] = x
        vals = phase.poly.eval_mod_arrays(arrays, mod)
        hist += np.bincount(vals, minlength=mod)
    for k in range(mod):
        if hist[k]:
            ang = Angle.make(k, D, p)
            acc[ang] = acc.get(ang, Fraction(0)) + weight * int(hist[k])


def integrate(
    f: CellFunction,
    phase=None,
    budget: int = DEFAULT_BUDGET,
    refine_bump: int = 0,
    level_floor: int = 0,
) -> CycValue:
    """Exact integral of (cell function) x psi(phase) over Q_p^n.

    Enumerates every cell at the joint refinement of the cell's own levels
    and the phase's declared levels; raises BudgetExceeded before enumerating
    more points than `budget`.
    """
    plan = [(cell, _cell_grid_levels(cell, phase, refine_bump, level_floor)) for cell, _ in f]
    needed = _count_points(plan, f.p)
    if needed > budget:
        raise BudgetExceeded(needed, budget)
    acc: dict[Angle, Fraction] = {}
    if phase is None:
        total = Fraction(0)
        for cell, v in f:
            total += v * cell.volume()
        return CycValue.rational(total)
    use_vector = _vector_path_ok(f, phase) and not hasattr(phase, "weight_at")
    for (cell, v), (_, L) in zip(f, plan):
        if use_vector:
            _integrate_cell_vectorized(cell, v, phase, L, acc)
            continue
        p = f.p
        ranges = [range(p ** (l - m)) for l, m in zip(L, cell.levels)]
        base_weight = v * Fraction(1, p ** sum(L))
        weight_fn = getattr(phase, "weight_at", None)
        for offsets in itertools.product(*ranges):
            point = tuple(
                c + Fraction(p) ** m * t
                for c, m, t in zip(cell.centers, cell.levels, offsets)
            )
            w = base_weight
            if weight_fn is not None:
                w = w * weight_fn(point)
                if w == 0:
                    continue
            ang = phase.angle_at(point)
            acc[ang] = acc.get(ang, Fraction(0)) + w
    return cyc_accumulate(acc.items())


def integrate_stable(
    f: CellFunction,
    phase=None,
    start_level: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> CycValue:
    """Integrate at the declared levels and once more one level deeper.

    Raises UnstableRefinement when the two disagree (the declared levels lied).
    """
    v0 = integrate(f, phase, budget=budget, level_floor=start_level)
    v1 = integrate(f, phase, budget=budget, level_floor=start_level, refine_bump=1)
    if v0 != v1:
        raise UnstableRefinement(
            f"value changed under refinement: {v0!r} -> {v1!r}"
        )
    return v0


def eliminate_linear(
    f: CellFunction,
    phase,
    coord: int,
    rng: random.Random | None = None,
    spot_checks: int = 8,
) -> tuple[CellFunction, FoldedPhase]:
    """Integrate out one coordinate in which the phase is affine.

    The integral over the coordinate's coset is char_integral(coefficient,
    level) times the character at the coset center; the first factor becomes
    a per-point weight of the returned folded phase, the second is absorbed
    by freezing the coordinate.  A randomized congruence spot-check guards
    the claimed affineness (NotAffine on failure).
    """
    if not 0 <= coord < f.n:
        raise ValueError("coordinate out of range")
    if not hasattr(phase, "affine_split"):
        raise NotAffine("phase exposes no affine data for elimination")
    coeff_at, _ = phase.affine_split(coord)
    rng = rng or random.Random(0)
    p = f.p

    # randomized congruence spot-check of the affine law
    lv = phase.levels(f.n)
    for _ in range(spot_checks):
        if not len(f.pieces):
            break
        cell, _v = f.pieces[rng.randrange(len(f.pieces))]
        point = []
        depth = [max(m, l) + 2 for m, l in zip(cell.levels, lv)]
        for c, m, d in zip(cell.centers, cell.levels, depth):
            point.append(c + Fraction(p) ** m * rng.randrange(p ** (d - m)))
        delta = Fraction(p) ** cell.levels[coord] * rng.randrange(1, p ** (depth[coord] - cell.levels[coord]) + 1)
        shifted = list(point)
        shifted[coord] += delta
        lhs = phase.angle_at(shifted) + (-phase.angle_at(point))
        rhs = psi_fraction(coeff_at(point) * delta, p)
        if lhs != rhs:
            raise NotAffine(
                f"phase increment in coordinate {coord} is not linear at {point}"
            )

    new_pieces = []
    cell_data = []
    extra = [0] * (f.n - 1)
    for cell, v in f:
        c, m = cell.coord_cell(coord)
        reduced = cell.drop_coord(coord)
        new_pieces.append((reduced, v))
        cell_data.append((reduced, c, m))
    for i in range(len(new_pieces)):
        for j in range(i + 1, len(new_pieces)):
            if new_pieces[i][0].meets(new_pieces[j][0]):
                raise ValueError(
                    "cells are no longer disjoint after dropping coordinate "
                    f"{coord}; the folded integrand is not a single cell "
                    "function times one character — refine the input so the "
                    "remaining coordinates separate cells"
                )
    folded = FoldedPhase(phase, coord, cell_data, tuple(extra))
    return CellFunction(f.p, f.n - 1, new_pieces), folded
