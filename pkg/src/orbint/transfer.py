"""Germ expansions near a = 0 and constructive transfer of step functions.

Near a = 0 every orbital integral in the campaign is an exact linear
combination of the two localized Kloosterman integrals

    K_sign(a) = integral over sign + p^m O of psi((x + 1/x)/a) dx,

with m = 1 for odd p and m = 2 at p = 2 (so that the two branches are
genuinely separated: |2| > |p^m|).  ``check_germ_membership`` certifies,
by exact evaluation at two consecutive probe valuations, that a given cell
function's normalized orbital integrals agree with the combination whose
coefficients are its own singular integrals.

The constructive direction: ``build_phi_from_step`` and
``build_fprime_from_step`` produce, for a prescribed step function on F^x,
test data whose orbital integrals reproduce the step function exactly, and
``verify_phi_against_step`` / ``verify_fprime_against_step`` replay the
construction on a probe grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cells import Cell, CellFunction
from .cyclotomic import CycValue, cyc_accumulate
from .engine import DEFAULT_LEAF_POINTS, EngineStats
from .errors import (
    BelowThreshold,
    CellShrinkFailed,
    FamilyMismatch,
    Mismatch,
)
from .measure import DEFAULT_BUDGET
from .orbital import (
    BruhatBoxes,
    decompose_parameter,
    i_orbital,
    i_singular,
    j_orbital,
    model_spec,
)
from .padic import Angle, fraction_val, unit_reps

__all__ = [
    "GermData",
    "kloosterman_piece",
    "germ_reference",
    "check_germ_membership",
    "validate_step",
    "build_phi_from_step",
    "verify_phi_against_step",
    "build_fprime_from_step",
    "verify_fprime_against_step",
]


# ---------------------------------------------------------------------------
# the two-piece germ space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GermData:
    """The coefficients and validity range of a two-piece germ expansion."""

    c_plus: CycValue
    c_minus: CycValue
    m: int  # localization depth: 1 for odd p, 2 at p = 2
    r0: int  # the expansion is asserted for valuations r >= r0


def kloosterman_piece(p: int, r: int, ufrac: Fraction, m: int, sign: int) -> CycValue:
    """Exact value of the localized Kloosterman integral K_sign at a = u p^r.

    Enumerates x = sign + p^m s over s mod p^(r-m); each level-r coset
    contributes volume p^-r times the root of unity at (x + 1/x)/a.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if r <= 0:
        # the phase is integral on the whole branch: plain volume
        return CycValue.rational(Fraction(1, p**m))
    mod = p**r
    ubar = (ufrac.denominator * pow(ufrac.numerator, -1, mod)) % mod
    span = max(0, r - m)
    terms = []
    weight = Fraction(1, p ** (m + span))
    for s in range(p**span):
        x = (sign + p**m * s) % mod
        xinv = pow(x, -1, mod)
        terms.append((Angle.make((x + xinv) * ubar, r, p), weight))
    return cyc_accumulate(terms)


def germ_reference(p: int, a, germ: GermData) -> CycValue:
    """c_plus * K_+(a) + c_minus * K_-(a), valid for val(a) >= germ.r0."""
    r, ufrac = decompose_parameter(a, p)
    if r < germ.r0:
        raise BelowThreshold(
            f"germ expansion asserted for valuation >= {germ.r0}, got {r}"
        )
    return germ.c_plus * kloosterman_piece(p, r, ufrac, germ.m, 1) + (
        germ.c_minus * kloosterman_piece(p, r, ufrac, germ.m, -1)
    )


def _max_level_and_denom(fn: CellFunction, skip_first: bool) -> tuple[int, int]:
    ml = 0
    md = 0
    for cell, _ in fn.pieces:
        levels = cell.levels[1:] if skip_first else cell.levels
        centers = cell.centers[1:] if skip_first else cell.centers
        for lv in levels:
            ml = max(ml, lv)
        for c in centers:
            if c != 0:
                md = max(md, -min(0, int(fraction_val(c, fn.p))))
    return ml, md


def check_germ_membership(
    model: int,
    phi: CellFunction,
    phiprime: CellFunction | None = None,
    *,
    r_probe: int | None = None,
    retries: int = 1,
    units: int = 0,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
) -> tuple[GermData, str]:
    """Certify that the normalized orbital integrals of (phi, phiprime) lie
    in the germ space spanned by the two localized Kloosterman pieces, with
    coefficients the singular integrals of the data themselves.

    Probes two consecutive valuations r0, r0+1 (r0 chosen from the cell
    geometry unless ``r_probe`` is given) over sampled unit classes, with
    ``retries`` automatic restarts two valuations deeper.  Returns
    (GermData, "member") on success; raises Mismatch carrying both exact
    values if the deepest probe still differs.
    """
    spec = model_spec(model)
    p = phi.p
    stats = stats if stats is not None else EngineStats()
    m = 1 if p > 2 else 2

    c_plus = i_singular(
        model, 1, phi, phiprime, budget=budget, leaf_points=leaf_points, stats=stats
    )
    c_minus = i_singular(
        model, -1, phi, phiprime, budget=budget, leaf_points=leaf_points, stats=stats
    )

    if r_probe is None:
        ml, md = _max_level_and_denom(phi, skip_first=True)
        if phiprime is not None:
            ml2, md2 = _max_level_and_denom(phiprime, skip_first=False)
            ml, md = max(ml, ml2), max(md, md2)
        r_probe = 2 * m + 1 + 2 * ml + 2 * md

    unit_pool = unit_reps(p, 1)
    if units:
        unit_pool = unit_pool[: max(1, units)]

    norm_exp = spec.n - 1  # left side is scaled by |a|^((1-n)/2) = p^(r(n-1)/2)
    cache: dict = {}
    last: tuple[CycValue, CycValue, int, int] | None = None
    for attempt in range(retries + 1):
        r0 = r_probe + 2 * attempt
        ok = True
        for r in (r0, r0 + 1):
            for u in unit_pool:
                a = Fraction(u) * Fraction(p) ** r
                left = i_orbital(
                    model, a, phi, phiprime,
                    budget=budget, leaf_points=leaf_points,
                    stats=stats, cache=cache,
                ) * Fraction(p ** (r * norm_exp // 2))
                right = c_plus * kloosterman_piece(p, r, Fraction(u), m, 1) + (
                    c_minus * kloosterman_piece(p, r, Fraction(u), m, -1)
                )
                if left != right:
                    ok = False
                    last = (left, right, r, u)
                    break
            if not ok:
                break
        if ok:
            return GermData(c_plus, c_minus, m, r0), "member"
    assert last is not None
    left, right, r, u = last
    raise Mismatch(
        left,
        right,
        f"model {model}, p={p}: normalized orbital at a={u}*{p}^{r} "
        f"differs from its germ expansion",
    )


# ---------------------------------------------------------------------------
# constructive transfer of step functions
# ---------------------------------------------------------------------------


def validate_step(target: CellFunction) -> None:
    """Check that a one-variable cell function is supported inside F^x.

    Each support cell c + p^m O must exclude 0, i.e. val(c) < m.
    """
    if target.n != 1:
        raise ValueError("a step function has exactly one coordinate")
    for cell, _ in target.pieces:
        c, m = cell.coord_cell(0)
        if c == 0 or fraction_val(c, target.p) >= m:
            raise ValueError(
                f"support cell {c} + p^{m} O contains 0; "
                "step functions must be supported in F^x"
            )


def _inner_box_value(
    model: int, p: int, a: Fraction, acell: Cell, level: int,
    budget: int, leaf_points: int, stats: EngineStats, cache: dict,
) -> CycValue:
    """The phase integral over the A-box (p^level O)^n at parameter a."""
    spec = model_spec(model)
    n = spec.n
    box = CellFunction(
        p,
        1 + n,
        [(
            Cell.make(
                p,
                (acell.centers[0],) + (Fraction(0),) * n,
                (acell.levels[0],) + (level,) * n,
            ),
            Fraction(1),
        )],
    )
    return i_orbital(
        model, a, box, budget=budget, leaf_points=leaf_points,
        stats=stats, cache=cache,
    )


def build_phi_from_step(
    model: int,
    target: CellFunction,
    *,
    max_shrink: int = 6,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
) -> CellFunction:
    """Construct phi with i_orbital(a, phi) == target(a) for every a in F^x.

    Family A only.  Over each support cell of the target the A-part is a
    ball (p^L O)^n, with L shrunk until the inner phase integral c(a) is
    refinement-stable and nonzero (c(L) = p^n c(L+1) != 0) at probe points
    covering the cell; the piece is weighted by target value / c(a).
    """
    spec = model_spec(model)
    if spec.family != "A":
        raise FamilyMismatch("constructive transfer builds family-A data")
    validate_step(target)
    p = target.p
    n = spec.n
    stats = stats if stats is not None else EngineStats()
    cache: dict = {}

    pieces = []
    for cell, value in target.pieces:
        c0, m0 = cell.coord_cell(0)
        r0 = int(fraction_val(c0, p))
        probes = [c0, c0 + Fraction(p) ** m0]
        level = max(r0, 0)
        chosen = None
        for level in range(max(r0, 0), max(r0, 0) + max_shrink):
            vals = [
                _inner_box_value(
                    model, p, a, cell, level, budget, leaf_points, stats, cache
                )
                for a in probes
            ]
            deeper = [
                _inner_box_value(
                    model, p, a, cell, level + 1, budget, leaf_points, stats, cache
                )
                for a in probes
            ]
            expected = CycValue.rational(Fraction(1, p ** (level * n)))
            stable = all(
                v == expected and v == d * Fraction(p**n)
                for v, d in zip(vals, deeper)
            )
            if stable:
                chosen = level
                break
        if chosen is None:
            raise CellShrinkFailed(
                f"no stable A-ball within {max_shrink} levels for target cell "
                f"at {c0} + p^{m0} O"
            )
        weight = value * Fraction(p ** (chosen * n))
        pieces.append(
            (
                Cell.make(
                    p,
                    (c0,) + (Fraction(0),) * n,
                    (m0,) + (chosen,) * n,
                ),
                weight,
            )
        )
    return CellFunction(p, 1 + n, pieces)


def _off_support_probe(target: CellFunction) -> Fraction:
    """A point of F^x where the step function vanishes."""
    p = target.p
    vals = [int(fraction_val(c.coord_cell(0)[0], p)) for c, _ in target.pieces]
    k = max(vals, default=0) + 1
    while True:
        a = Fraction(p) ** k
        if target.evaluate((a,)) == 0:
            return a
        k += 1


def probe_grid(target: CellFunction) -> list[Fraction]:
    """Probe points: two per support cell, plus one off-support point."""
    out = []
    for cell, _ in target.pieces:
        c, m = cell.coord_cell(0)
        out.append(c)
        out.append(c + Fraction(target.p) ** m)
    out.append(_off_support_probe(target))
    return out


def verify_phi_against_step(
    model: int,
    target: CellFunction,
    phi: CellFunction,
    *,
    budget: int = DEFAULT_BUDGET,
    leaf_points: int = DEFAULT_LEAF_POINTS,
    stats: EngineStats | None = None,
) -> list[tuple[Fraction, CycValue, CycValue, bool]]:
    """Replay i_orbital(a, phi) against target(a) on the probe grid."""
    stats = stats if stats is not None else EngineStats()
    cache: dict = {}
    rows = []
    for a in probe_grid(target):
        want = CycValue.rational(target.evaluate((a,)))
        got = i_orbital(
            model, a, phi, budget=budget, leaf_points=leaf_points,
            stats=stats, cache=cache,
        )
        rows.append((a, want, got, want == got))
    return rows


def build_fprime_from_step(
    p: int, target: CellFunction, *, ball_level: int = 0
) -> BruhatBoxes:
    """Construct f' with j_orbital(a, f') == target(a) for every a in F^x.

    The Bruhat-box description is exact for every parameter: over each a the
    (x, y)-part is the normalized indicator of (p^L O)^2, on which the
    character psi(x + y) is identically 1.
    """
    validate_step(target)
    return BruhatBoxes(p, target, ball_level=ball_level)


def verify_fprime_against_step(
    target: CellFunction,
    fprime,
    *,
    budget: int = DEFAULT_BUDGET,
) -> list[tuple[Fraction, CycValue, CycValue, bool]]:
    """Replay j_orbital(a, f') against target(a) on the probe grid."""
    rows = []
    for a in probe_grid(target):
        want = CycValue.rational(target.evaluate((a,)))
        got = j_orbital(fprime, a, budget=budget)
        rows.append((a, want, got, want == got))
    return rows
