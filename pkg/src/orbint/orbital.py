"""Orbital integrals on both sides of the comparison, and their matching.

One side integrates a cell function against an additive character whose
phase is built from the cubic norm structure of one of the six models
(``i_orbital``, ``i_singular``); the other side is a Kloosterman-type
integral over Bruhat cells of SL2 (``j_orbital``, ``j_plus``/``j_minus``).
``verify_fl`` runs both sides over a grid of orbit parameters ``a = u p^r``
and checks the exact matching identity

    i_orbital(a)  ==  |a|^((n+1)/2) * j_orbital(a)

coefficient by coefficient in the cyclotomic field, plus the two singular
rows.  Family A models (1-4) integrate over the cubic-norm space J alone;
family B models (5-6) carry an auxiliary linear-form variable Y and need
p odd (the phase divides by 2).

All arithmetic is exact: values are ``CycValue`` elements of Q(zeta_{p^M}).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cells import Cell, CellFunction
from .cyclotomic import CycValue
from .engine import (
    DEFAULT_LEAF_POINTS,
    EngineStats,
    character_lattice_integral,
    histogram_to_value,
)
from .errors import FamilyMismatch, OddPrimeRequired
from .jordan import ModelAlgebra, model_algebra
from .measure import DEFAULT_BUDGET, CallablePhase, KloostermanPhase, integrate
from .padic import PAdic, fraction_val, psi_fraction, unit_reps
from .poly import Mono, Poly, _mono_mul, fraction_poly_to_int

__all__ = [
    "ModelSpec",
    "model_spec",
    "phi_zero",
    "phiprime_zero",
    "i_orbital",
    "i_singular",
    "j_orbital",
    "j_plus",
    "j_minus",
    "j_unit_closed",
    "KuznetsovUnit",
    "BruhatBoxes",
    "vanishing_threshold",
    "verify_fl",
    "ReportRow",
    "OrbitalReport",
    "cyc_string",
    "decompose_parameter",
]


# ---------------------------------------------------------------------------
# model descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Everything the integrators need to know about one model.

    ``y_pair`` lists the J-coordinates that pair with the auxiliary
    variables Y_0..Y_{y_dim-1} in the family-B phase; ``aa_pairs`` are the
    coordinate pairs whose products sum to the quadratic form <A,A>;
    ``sing_eps``/``sing_free`` describe the singular slice (coordinates
    pinned to the sign, respectively left free), and ``ydot_pairs`` encodes
    the singular phase as a sum of products
    (free[fa] - Y[yb]) * (free[fc] - Y[yd]).
    """

    model: int
    family: str
    n: int
    algebra: ModelAlgebra
    y_dim: int = 0
    y_pair: tuple[int, ...] = ()
    aa_pairs: tuple[tuple[int, int], ...] = ()
    sing_eps: tuple[int, ...] = ()
    sing_free: tuple[int, ...] = ()
    ydot_pairs: tuple[tuple[int, int, int, int], ...] = ()


# family-B auxiliary data, keyed by model number; family A needs none.
_B_TABLE = {
    5: dict(
        y_dim=4,
        # <Y, A> = Y_0 A_2 + Y_1 A_3 + Y_2 A_4 + Y_3 A_5 in root coordinates
        y_pair=(1, 2, 3, 4),
        # <A, A> = A_2 A_5 + A_3 A_4
        aa_pairs=((1, 4), (2, 3)),
        # singular slice pins A_1, A_25, A_34 to the sign and frees A_1j
        sing_eps=(0, 11, 12),
        sing_free=(5, 6, 7, 8),
        # Y.A = (A_12 - Y_3)(A_15 - Y_0) + (A_13 - Y_2)(A_14 - Y_1)
        ydot_pairs=((0, 3, 3, 0), (1, 2, 2, 1)),
    ),
    6: dict(
        y_dim=2,
        y_pair=(2, 3),
        aa_pairs=((2, 3),),
        sing_eps=(0, 1, 6),
        sing_free=(4, 5),
        ydot_pairs=((0, 1, 1, 0),),
    ),
}

_SPEC_CACHE: dict[int, ModelSpec] = {}


def model_spec(model: int) -> ModelSpec:
    """Build (and cache) the integration descriptor for a model."""
    if model not in _SPEC_CACHE:
        alg = model_algebra(model)
        extra = _B_TABLE.get(model, {})
        _SPEC_CACHE[model] = ModelSpec(
            model=model,
            family=alg.family,
            n=alg.dim,
            algebra=alg,
            **extra,
        )
    return _SPEC_CACHE[model]


_PHASE_CACHE: dict[int, Poly] = {}


def _phase_poly(spec: ModelSpec) -> Poly:
    """trace(A) - norm(A) as an integer polynomial in the J coordinates."""
    if spec.model not in _PHASE_CACHE:
        cubic = spec.algebra.cubic
        tr = Poly()
        for i, c in enumerate(cubic.trace_vec):
            tr = tr + Poly.var(i, int(c))
        _PHASE_CACHE[spec.model] = tr - cubic.norm_poly
    return _PHASE_CACHE[spec.model]


def phi_zero(model: int, p: int) -> CellFunction:
    """The basic test function: the indicator of O + J(O)."""
    spec = model_spec(model)
    cell = Cell.make(p, [Fraction(0)] * (1 + spec.n), [0] * (1 + spec.n))
    return CellFunction(p, 1 + spec.n, [(cell, Fraction(1))])


def phiprime_zero(model: int, p: int) -> CellFunction:
    """The basic auxiliary function for family B: the indicator of Y(O)."""
    spec = model_spec(model)
    if spec.family != "B":
        raise FamilyMismatch(f"model {model} takes no auxiliary function")
    cell = Cell.make(p, [Fraction(0)] * spec.y_dim, [0] * spec.y_dim)
    return CellFunction(p, spec.y_dim, [(cell, Fraction(1))])


# ---------------------------------------------------------------------------
# parameter decomposition and unit arithmetic
# ---------------------------------------------------------------------------


def decompose_parameter(a, p: int) -> tuple[int, Fraction]:
    """Split a nonzero parameter into (valuation r, exact unit part).

    Accepts ints, Fractions, or PAdic values (via their exact rational
    representative).  The unit part is returned as a Fraction with p-free
    numerator and denominator, so it can later be reduced modulo any p^K.
    """
    if isinstance(a, PAdic):
        if p != a.p:
            raise ValueError(f"parameter lives over p={a.p}, expected p={p}")
        q = a.to_fraction()
    else:
        q = Fraction(a)
    if q == 0:
        raise ValueError("orbit parameter must be nonzero")
    r = fraction_val(q, p)
    return int(r), q / Fraction(p) ** int(r)


def _unit_inverse(ufrac: Fraction, p: int, denom_exp: int) -> int:
    """The inverse of a unit Fraction modulo p^denom_exp, as an integer."""
    if denom_exp <= 0:
        return 1
    mod = p**denom_exp
    num = ufrac.numerator % mod
    den = ufrac.denominator % mod
    return (den * pow(num, -1, mod)) % mod


# ---------------------------------------------------------------------------
# substitution of cell coordinates into phase polynomials
# ---------------------------------------------------------------------------


def _shift_scale(
    poly: Poly, centers: Sequence[Fraction], levels: Sequence[int], p: int
) -> dict[Mono, Fraction]:
    """Substitute x_i = centers[i] + p^levels[i] * t_i into an integer poly.

    Returns the resulting polynomial in the t variables as a sparse map
    from monomials to exact Fraction coefficients (centers may have p-power
    denominators, so coefficients are rational).
    """
    out: dict[Mono, Fraction] = {}
    pf = Fraction(p)
    for mono, coeff in poly.terms.items():
        partial: dict[Mono, Fraction] = {(): Fraction(coeff)}
        for v, e in mono:
            c = Fraction(centers[v])
            scale = pf ** levels[v]
            weights = [
                Fraction(math.comb(e, k)) * c ** (e - k) * scale**k
                for k in range(e + 1)
            ]
            nxt: dict[Mono, Fraction] = {}
            for m0, c0 in partial.items():
                for k, w in enumerate(weights):
                    if w == 0:
                        continue
                    m1 = _mono_mul(m0, ((v, k),)) if k else m0
                    nxt[m1] = nxt.get(m1, Fraction(0)) + c0 * w
            partial = nxt
        for m, c in partial.items():
            if c:
                acc = out.get(m, Fraction(0)) + c
                if acc:
                    out[m] = acc
                elif m in out:
                    del out[m]
    return out


def _cell_problem(
    scaled: dict[Mono, Fraction], p: int
) -> tuple[Poly, int]:
    """Clear p-power denominators from a rational phase polynomial."""
    if not scaled:
        return Poly(), 0
    return fraction_poly_to_int(scaled, p)


# ---------------------------------------------------------------------------
# the J-side integrals (family A and family B)
# ---------------------------------------------------------------------------


def _orbital_a(
    spec: ModelSpec,
    p: int,
    r: int,
    ufrac: Fraction,
    phi: CellFunction,
    budget: int,
    leaf_points: int,
    stats: EngineStats,
    cache: dict | None,
) -> CycValue:
    """Family A: integral over J of phi(a, A) psi((tr(A) - N(A)) / a).

    The engine histogram for each support cell depends only on (p, r, cell),
    never on the unit part of a, so histograms are cached and the unit is
    applied afterwards as a twist of the histogram keys.
    """
    a_value = ufrac * Fraction(p) ** r
    slice_fn = phi.slice_first(a_value)
    phase = _phase_poly(spec)
    total = CycValue.zero()
    for cell, weight in slice_fn.pieces:
        entry = None
        key = None
        if cache is not None:
            key = (spec.model, p, r, cell.centers, cell.levels)
            entry = cache.get(key)
        if entry is None:
            scaled = _shift_scale(phase, cell.centers, cell.levels, p)
            scaled = {m: c / Fraction(p) ** r for m, c in scaled.items()}
            num, dexp = _cell_problem(scaled, p)
            hist = character_lattice_integral(
                p,
                dexp,
                [(num, dexp)],
                [],
                budget=budget,
                leaf_points=leaf_points,
                stats=stats,
            )
            entry = (hist, dexp)
            if cache is not None:
                cache[key] = entry
        hist, dexp = entry
        twist = _unit_inverse(ufrac, p, dexp)
        value = histogram_to_value(hist, p, dexp, twist=twist)
        total = total + value * (weight * cell.volume())
    return total


def _orbital_b(
    spec: ModelSpec,
    p: int,
    r: int,
    ufrac: Fraction,
    phi: CellFunction,
    phiprime: CellFunction,
    budget: int,
    leaf_points: int,
    stats: EngineStats,
) -> CycValue:
    """Family B: joint integral over (A, Y) with phase

        (tr(A) - N(A) - <Y,A>) / a  -  <A,A> / (2 a^2).

    Unit parts cannot be twisted through a single histogram here (the two
    phase terms carry different powers of a), so they are folded into the
    integer numerators modulo the cleared denominator before each run.
    """
    if p == 2:
        raise OddPrimeRequired(
            f"model {spec.model} divides by 2 in the phase; p must be odd"
        )
    a_value = ufrac * Fraction(p) ** r
    slice_fn = phi.slice_first(a_value)
    if not slice_fn.pieces:
        return CycValue.zero()

    n = spec.n
    main = _phase_poly(spec)
    for pos, coord in enumerate(spec.y_pair):
        main = main - Poly.var(n + pos) * Poly.var(coord)
    quad = Poly()
    for i, j in spec.aa_pairs:
        quad = quad + Poly.var(i) * Poly.var(j)

    total = CycValue.zero()
    for acell, aweight in slice_fn.pieces:
        for ycell, yweight in phiprime.pieces:
            centers = acell.centers + ycell.centers
            levels = acell.levels + ycell.levels

            d1 = _shift_scale(main, centers, levels, p)
            d1 = {m: c / Fraction(p) ** r for m, c in d1.items()}
            num1, dexp1 = _cell_problem(d1, p)
            if dexp1 > 0:
                num1 = num1 * _unit_inverse(ufrac, p, dexp1)

            d2 = _shift_scale(quad, centers, levels, p)
            d2 = {m: -c / Fraction(p) ** (2 * r) for m, c in d2.items()}
            num2, dexp2 = _cell_problem(d2, p)
            if dexp2 > 0:
                num2 = num2 * _unit_inverse(2 * ufrac * ufrac, p, dexp2)

            dout = max(dexp1, dexp2)
            hist = character_lattice_integral(
                p,
                dout,
                [(num1, dexp1), (num2, dexp2)],
                [],
                budget=budget,
                leaf_points=leaf_points,
                stats=stats,
            )
            value = histogram_to_value(hist, p, dout)
            total = total + value * (
                aweight * yweight * acell.volume() * ycell.volume()
            )
    return total


def i_orbital(
    model: int,
    a,
    phi: CellFunction,
    phiprime: CellFunction | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
    cache: dict | None = None,
) -> CycValue:
    """The regular orbital integral at parameter ``a`` for the given model.

    ``a`` may be an int, Fraction, or PAdic.  Family B models require the
    auxiliary cell function ``phiprime`` on the Y variables and p odd.
    """
    spec = model_spec(model)
    p = phi.p
    stats = stats if stats is not None else EngineStats()
    r, ufrac = decompose_parameter(a, p)
    if spec.family == "A":
        if phiprime is not None:
            raise FamilyMismatch(f"model {model} takes no auxiliary function")
        return _orbital_a(spec, p, r, ufrac, phi, budget, leaf_points, stats, cache)
    if phiprime is None:
        raise FamilyMismatch(f"model {model} needs an auxiliary function")
    if phiprime.p != p or phiprime.n != spec.y_dim:
        raise FamilyMismatch(
            f"auxiliary function must have {spec.y_dim} coordinates over p={p}"
        )
    return _orbital_b(
        spec, p, r, ufrac, phi, phiprime, budget, leaf_points, stats
    )


def i_singular(
    model: int,
    sign: int,
    phi: CellFunction,
    phiprime: CellFunction | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
) -> CycValue:
    """The singular orbital integral attached to ``sign`` in {+1, -1}.

    Family A: the value phi(0, sign * identity).  Family B: an exact
    integral of phi * phiprime over the singular slice against a bilinear
    phase in the free slice coordinates and Y.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    spec = model_spec(model)
    p = phi.p
    if spec.family == "A":
        if phiprime is not None:
            raise FamilyMismatch(f"model {model} takes no auxiliary function")
        point = (Fraction(0),) + tuple(
            Fraction(sign * int(c)) for c in spec.algebra.cubic.identity
        )
        return CycValue.rational(phi.evaluate(point))

    if phiprime is None:
        raise FamilyMismatch(f"model {model} needs an auxiliary function")
    if p == 2:
        raise OddPrimeRequired(
            f"model {spec.model} divides by 2 in the phase; p must be odd"
        )
    stats = stats if stats is not None else EngineStats()

    assignments: dict[int, Fraction] = {0: Fraction(0)}
    for coord in range(spec.n):
        if coord in spec.sing_free:
            continue
        assignments[1 + coord] = (
            Fraction(sign) if coord in spec.sing_eps else Fraction(0)
        )
    sliced = phi.slice_coords(assignments)

    f = len(spec.sing_free)
    dot = Poly()
    for fa, yb, fc, yd in spec.ydot_pairs:
        dot = dot + (Poly.var(fa) - Poly.var(f + yb)) * (
            Poly.var(fc) - Poly.var(f + yd)
        )
    phase = dot * 2

    total = CycValue.zero()
    for gcell, gweight in sliced.pieces:
        for ycell, yweight in phiprime.pieces:
            centers = gcell.centers + ycell.centers
            levels = gcell.levels + ycell.levels
            scaled = _shift_scale(phase, centers, levels, p)
            num, dexp = _cell_problem(scaled, p)
            hist = character_lattice_integral(
                p,
                dexp,
                [(num, dexp)],
                [],
                budget=budget,
                leaf_points=leaf_points,
                stats=stats,
            )
            value = histogram_to_value(hist, p, dexp)
            total = total + value * (
                gweight * yweight * gcell.volume() * ycell.volume()
            )
    return total


# ---------------------------------------------------------------------------
# the Kuznetsov side
# ---------------------------------------------------------------------------


class KuznetsovUnit:
    """Bruhat-cell data of the basic bi-K-invariant test function on SL2.

    In coordinates g = (a x, a x y - 1/a; a, a y) the support condition
    "g integral with unit determinant structure" becomes, for a = u p^r
    with r >= 1: x and y lie in p^{-r} O at unit numerators s and t with
    s t = ubar^2 mod p^r; for r = 0 it is the full lattice O x O; for
    r < 0 it is empty.
    """

    kind = "kuznetsov-unit"

    def __init__(self, p: int):
        self.p = p

    def cells_for(self, r: int, ufrac: Fraction) -> CellFunction:
        p = self.p
        if r < 0:
            return CellFunction(p, 2, [])
        if r == 0:
            cell = Cell.make(p, [Fraction(0), Fraction(0)], [0, 0])
            return CellFunction(p, 2, [(cell, Fraction(1))])
        mod = p**r
        usq_inv = _unit_inverse(ufrac * ufrac, p, r)
        pieces = []
        for s in unit_reps(p, r):
            t = (usq_inv * pow(s, -1, mod)) % mod
            cell = Cell.make(p, [Fraction(s, mod), Fraction(t, mod)], [0, 0])
            pieces.append((cell, Fraction(1)))
        return CellFunction(p, 2, pieces)

    def unipotent_cells(self, sign: int) -> CellFunction:
        cell = Cell.make(self.p, [Fraction(0)], [0])
        return CellFunction(self.p, 1, [(cell, Fraction(1))])

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p}


class BruhatBoxes:
    """A test function prescribed cell-by-cell in the Bruhat coordinates.

    ``target`` is a one-variable cell function of the parameter a; on the
    fiber over each target cell the function is the normalized indicator of
    (p^L O)^2 in (x, y), so that the x,y-integral of the plain indicator
    times the normalization equals target(a).  Such a function vanishes on
    the unipotent orbits, so both singular values are zero.
    """

    kind = "bruhat-boxes"

    def __init__(self, p: int, target: CellFunction, ball_level: int = 0):
        if target.p != p or target.n != 1:
            raise ValueError("target must be a one-variable cell function over p")
        self.p = p
        self.target = target
        self.ball_level = int(ball_level)

    def cells_for(self, r: int, ufrac: Fraction) -> CellFunction:
        p = self.p
        a_value = ufrac * Fraction(p) ** r
        value = self.target.evaluate((a_value,))
        if value == 0:
            return CellFunction(p, 2, [])
        L = self.ball_level
        cell = Cell.make(p, [Fraction(0), Fraction(0)], [L, L])
        return CellFunction(p, 2, [(cell, value * Fraction(p) ** (2 * L))])

    def unipotent_cells(self, sign: int) -> CellFunction:
        return CellFunction(self.p, 1, [])

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "ball_level": self.ball_level,
            "target": self.target.to_json_dict(),
        }


def j_orbital(fprime, a, *, budget: int = DEFAULT_BUDGET) -> CycValue:
    """The Kloosterman-type orbital integral of f' at parameter a.

    Evaluated directly as an additive-character integral over the Bruhat
    cells returned by ``fprime.cells_for`` with phase psi(x + y) — a code
    path independent of both the lattice engine and the closed form.
    """
    p = fprime.p
    r, ufrac = decompose_parameter(a, p)
    cells = fprime.cells_for(r, ufrac)
    if not cells.pieces:
        return CycValue.zero()
    phase = CallablePhase(
        p, (0, 0), lambda pt: psi_fraction(pt[0] + pt[1], p)
    )
    return integrate(cells, phase, budget=budget)


def _j_unipotent(fprime, sign: int, budget: int) -> CycValue:
    cells = fprime.unipotent_cells(sign)
    if not cells.pieces:
        return CycValue.zero()
    phase = CallablePhase(fprime.p, (0,), lambda pt: psi_fraction(pt[0], fprime.p))
    return integrate(cells, phase, budget=budget)


def j_plus(fprime, *, budget: int = DEFAULT_BUDGET) -> CycValue:
    """The unipotent integral of f' along the +1 branch."""
    return _j_unipotent(fprime, 1, budget)


def j_minus(fprime, *, budget: int = DEFAULT_BUDGET) -> CycValue:
    """The unipotent integral of f' along the -1 branch."""
    return _j_unipotent(fprime, -1, budget)


def j_unit_closed(p: int, a, *, budget: int = DEFAULT_BUDGET) -> CycValue:
    """Closed form of j_orbital for the basic test function.

    0 for |a| > 1, 1 for |a| = 1, and p^r times the unit-group Kloosterman
    integral with twist 1/u for a = u p^r, r >= 1.  Used as an independent
    cross-check of ``j_orbital(KuznetsovUnit(p), a)``.
    """
    r, ufrac = decompose_parameter(a, p)
    if r < 0:
        return CycValue.zero()
    if r == 0:
        return CycValue.rational(1)
    units = CellFunction(
        p,
        1,
        [(Cell.make(p, [Fraction(s)], [1]), Fraction(1)) for s in range(1, p)],
    )
    mod = p**r
    unit_res = (ufrac.numerator * pow(ufrac.denominator, -1, mod)) % mod
    phase = KloostermanPhase(p, r, unit=unit_res)
    return integrate(units, phase, budget=budget) * Fraction(p) ** r


# ---------------------------------------------------------------------------
# vanishing certificates
# ---------------------------------------------------------------------------


def vanishing_threshold(model: int, phi: CellFunction) -> int | None:
    """A certified r beyond which i_orbital(u p^r, phi) vanishes, or None.

    The phase (tr - N)/a is affine in every single J coordinate.  On a
    support cell, if the coefficient polynomial of some coordinate has
    constant term of strictly smaller valuation v0 than every other
    coefficient after centering, then that coefficient is a unit times
    p^v0 on the whole cell, and the inner character integral in that
    coordinate kills the cell for r >= v0 + level + 1.  The threshold is
    the max over cells of the min over coordinates; None when some cell
    has no such certificate.
    """
    spec = model_spec(model)
    if spec.family != "A":
        raise FamilyMismatch("vanishing certificates are for family A models")
    p = phi.p
    phase = _phase_poly(spec)
    worst = 0
    for cell, _ in phi.pieces:
        acell = cell.drop_coord(0)
        best: int | None = None
        for gamma in range(spec.n):
            deriv = phase.derivative(gamma)
            scaled = _shift_scale(deriv, acell.centers, acell.levels, p)
            const = scaled.get((), Fraction(0))
            if const == 0:
                continue
            v0 = fraction_val(const, p)
            rest = min(
                (fraction_val(c, p) for m, c in scaled.items() if m != ()),
                default=None,
            )
            if rest is not None and rest <= v0:
                continue
            cand = int(v0) + acell.levels[gamma] + 1
            if best is None or cand < best:
                best = cand
        if best is None:
            return None
        worst = max(worst, best)
    return worst


# ---------------------------------------------------------------------------
# the matching campaign
# ---------------------------------------------------------------------------


def cyc_string(v: CycValue) -> str:
    """Compact deterministic rendering of an exact cyclotomic value."""
    if v.M == 0:
        return str(v.coeffs[0]) if v.coeffs else "0"
    coeffs = ",".join(str(c) for c in v.coeffs)
    return f"zeta({v.p}^{v.M})[{coeffs}]"


@dataclass
class ReportRow:
    """One verified identity: left == scale * right, exactly."""

    model: int
    p: int
    kind: str  # "orbital", "singular+", or "singular-"
    r: int | None
    u: int | None
    left: CycValue
    right: CycValue
    scale: Fraction
    verdict: str
    points: int
    millis: int

    @property
    def ok(self) -> bool:
        return self.verdict == "equal"

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "p": self.p,
            "kind": self.kind,
            "r": self.r,
            "u": self.u,
            "left": self.left.describe(),
            "right": self.right.describe(),
            "scale": str(self.scale),
            "verdict": self.verdict,
            "points": self.points,
        }

    def to_csv_row(self) -> list:
        return [
            self.model,
            self.p,
            self.r if self.r is not None else self.kind,
            self.u if self.u is not None else "",
            cyc_string(self.left),
            cyc_string(self.right),
            str(self.scale),
            self.verdict,
            self.points,
            self.millis,
        ]


CSV_HEADER = [
    "model",
    "p",
    "r",
    "u",
    "side_left",
    "side_right",
    "scale",
    "verdict",
    "points",
    "millis",
]


@dataclass
class OrbitalReport:
    """The outcome of a matching campaign for one (model, p)."""

    model: int
    p: int
    family: str
    n: int
    rows: list

    @property
    def ok(self) -> bool:
        return all(row.ok for row in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "p": self.p,
            "family": self.family,
            "n": self.n,
            "ok": self.ok,
            "rows": [row.to_json_dict() for row in self.rows],
        }


def _unit_list(p: int, r: int, units) -> list[int]:
    if r == 0:
        return [1]
    reps = unit_reps(p, min(r, 2))
    if units == "all":
        return reps
    kind, k = units
    if kind != "first":
        raise ValueError("units must be 'all' or ('first', k)")
    return reps[: max(1, int(k))]


def verify_fl(
    model: int,
    p: int,
    r_max: int = 1,
    units="all",
    *,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
) -> OrbitalReport:
    """Check the matching identity for the basic test functions.

    Runs both singular rows and every orbital parameter a = u p^r with
    0 <= r <= r_max and u over the sampled unit classes, comparing
    i_orbital(a) with |a|^((n+1)/2) * j_orbital(a) by exact cyclotomic
    equality.  Family B models contribute |4| = 1 on the left since p is
    odd there.
    """
    spec = model_spec(model)
    phi = phi_zero(model, p)
    phiprime = phiprime_zero(model, p) if spec.family == "B" else None
    fprime = KuznetsovUnit(p)
    stats = EngineStats()
    cache: dict = {}
    rows: list[ReportRow] = []

    def clocked(fn):
        before_pts = stats.points
        t0 = time.monotonic_ns()
        out = fn()
        millis = (time.monotonic_ns() - t0) // 1_000_000
        return out, stats.points - before_pts, int(millis)

    for sign, kind, jfn in ((1, "singular+", j_plus), (-1, "singular-", j_minus)):
        (left, right), pts, ms = clocked(
            lambda sign=sign, jfn=jfn: (
                i_singular(
                    model, sign, phi, phiprime,
                    budget=budget, leaf_points=leaf_points, stats=stats,
                ),
                jfn(fprime, budget=budget),
            )
        )
        rows.append(
            ReportRow(
                model, p, kind, None, None, left, right, Fraction(1),
                "equal" if left == right else "DIFFER",
                pts, ms,
            )
        )

    for r in range(0, r_max + 1):
        scale = Fraction(1, p ** (r * (spec.n + 1) // 2))
        for u in _unit_list(p, r, units):
            a = Fraction(u) * Fraction(p) ** r

            def one(a=a):
                left = i_orbital(
                    model, a, phi, phiprime,
                    budget=budget, leaf_points=leaf_points,
                    stats=stats, cache=cache,
                )
                right = j_orbital(fprime, a, budget=budget)
                return left, right

            (left, right), pts, ms = clocked(one)
            scaled_right = right * scale
            rows.append(
                ReportRow(
                    model, p, "orbital", r, u, left, scaled_right, scale,
                    "equal" if left == scaled_right else "DIFFER",
                    pts, ms,
                )
            )

    return OrbitalReport(model, p, spec.family, spec.n, rows)
