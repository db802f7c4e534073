"""Tests for the germ expansion and the constructive transfer of steps.

The reference values here come from independent re-computations inside the
test module: the localized Kloosterman branches are re-enumerated directly
over full residue grids, and recomposition is checked against the closed
form for the unit integral, which is computed by a separate code path
(`j_unit_closed` runs through the measure layer, not through sums written
here).
"""

from fractions import Fraction

import pytest

from orbint.cells import Cell, CellFunction
from orbint.cyclotomic import CycValue, cyc_accumulate
from orbint.errors import (
    BelowThreshold,
    FamilyMismatch,
    Mismatch,
)
from orbint.orbital import (
    i_singular,
    j_orbital,
    j_unit_closed,
    model_spec,
    phi_zero,
    phiprime_zero,
)
from orbint.padic import Angle, unit_reps
from orbint.transfer import (
    GermData,
    build_fprime_from_step,
    build_phi_from_step,
    check_germ_membership,
    germ_reference,
    kloosterman_piece,
    probe_grid,
    validate_step,
    verify_fprime_against_step,
    verify_phi_against_step,
)


def direct_branch(p: int, r: int, u: int, m: int, sign: int) -> CycValue:
    """Oracle: enumerate the branch over the full residue grid mod p^r.

    Walks every x on a grid fine enough to see the branch (mod p^max(r,m))
    and keeps those congruent to sign mod p^m, each with plain grid volume —
    a different decomposition from the production code, which enumerates
    cosets of p^m O.
    """
    big = p ** max(r, m)
    ubar = pow(u, -1, big)
    terms = []
    for x in range(big):
        if (x - sign) % (p**m) != 0:
            continue
        xinv = pow(x, -1, big)
        terms.append((Angle.make((x + xinv) * ubar, r, p), Fraction(1, big)))
    return cyc_accumulate(terms)


def unit_integral(p: int, r: int, u: int) -> CycValue:
    """The full unit-group integral via the closed form (measure layer)."""
    a = Fraction(u) * Fraction(p) ** r
    return j_unit_closed(p, a) * Fraction(1, p**r)


class TestKloostermanPiece:
    def test_matches_direct_enumeration(self):
        for p in (2, 3, 5):
            m = 1 if p > 2 else 2
            for r in (1, 2, 3):
                for u in unit_reps(p, 1):
                    for sign in (1, -1):
                        got = kloosterman_piece(p, r, Fraction(u), m, sign)
                        assert got == direct_branch(p, r, u, m, sign), (
                            p, r, u, sign,
                        )

    def test_shallow_parameter_is_plain_volume(self):
        for p, m in ((3, 1), (2, 2), (5, 1)):
            for r in (0, -1, -3):
                got = kloosterman_piece(p, r, Fraction(1), m, 1)
                assert got == CycValue.rational(Fraction(1, p**m))

    def test_sign_validation(self):
        with pytest.raises(ValueError):
            kloosterman_piece(3, 1, Fraction(1), 1, 2)

    def test_branches_recompose_unit_integral_odd(self):
        # at p = 3 the two branches tile the unit group exactly, so the
        # recomposition holds at every depth
        for r in (1, 2, 3, 4):
            for u in (1, 2):
                total = kloosterman_piece(3, r, Fraction(u), 1, 1) + (
                    kloosterman_piece(3, r, Fraction(u), 1, -1)
                )
                assert total == unit_integral(3, r, u), (r, u)

    def test_branches_recompose_unit_integral_even(self):
        # at p = 2 with m = 2 the branches 1+4O and -1+4O tile the odd units
        for r in (1, 2, 3, 4):
            total = kloosterman_piece(2, r, Fraction(1), 2, 1) + (
                kloosterman_piece(2, r, Fraction(1), 2, -1)
            )
            assert total == unit_integral(2, r, 1), r

    def test_localization_deep_at_5(self):
        # away from the critical points the phase oscillates out once
        # r >= 2m + 1 = 3
        for r in (3, 4):
            for u in (1, 2):
                total = kloosterman_piece(5, r, Fraction(u), 1, 1) + (
                    kloosterman_piece(5, r, Fraction(u), 1, -1)
                )
                assert total == unit_integral(5, r, u), (r, u)

    def test_localization_fails_shallow_at_5(self):
        # at r = 1 the classes 2, 3 mod 5 still contribute: x + 1/x = 0
        # there, so each adds volume 1/5 to the unit integral
        total = kloosterman_piece(5, 1, Fraction(1), 1, 1) + (
            kloosterman_piece(5, 1, Fraction(1), 1, -1)
        )
        full = unit_integral(5, 1, 1)
        assert total != full
        assert full + (CycValue.rational(Fraction(-1)) * total) == CycValue.rational(
            Fraction(2, 5)
        )

    def test_concrete_sum_at_3(self):
        # x = 1 and x = 2 give angles 2/3 and 4/3; the primitive cube
        # roots sum to -1, so the two branches total -1/3
        total = kloosterman_piece(3, 1, Fraction(1), 1, 1) + (
            kloosterman_piece(3, 1, Fraction(1), 1, -1)
        )
        assert total == CycValue.rational(Fraction(-1, 3))


class TestGermReference:
    def test_below_threshold_raises(self):
        germ = GermData(CycValue.rational(1), CycValue.rational(1), 1, 3)
        with pytest.raises(BelowThreshold):
            germ_reference(3, Fraction(9), germ)

    def test_combines_pieces(self):
        germ = GermData(
            CycValue.rational(Fraction(2)), CycValue.rational(Fraction(-3)), 1, 2
        )
        for u in (1, 2):
            a = Fraction(u * 9)
            want = CycValue.rational(Fraction(2)) * kloosterman_piece(
                3, 2, Fraction(u), 1, 1
            ) + CycValue.rational(Fraction(-3)) * kloosterman_piece(
                3, 2, Fraction(u), 1, -1
            )
            assert germ_reference(3, a, germ) == want


def ident_phi(model: int, p: int) -> CellFunction:
    """Level-1 cells centered at +identity (weight 5/2) and -identity (1/3)."""
    spec = model_spec(model)
    ident = tuple(Fraction(c) for c in spec.algebra.cubic.identity)
    return CellFunction(
        p,
        1 + spec.n,
        [
            (
                Cell.make(p, (Fraction(0),) + ident, (1,) + (1,) * spec.n),
                Fraction(5, 2),
            ),
            (
                Cell.make(
                    p,
                    (Fraction(0),) + tuple(-c for c in ident),
                    (0,) + (1,) * spec.n,
                ),
                Fraction(1, 3),
            ),
        ],
    )


class TestGermMembership:
    def test_basic_data_model1(self):
        germ, verdict = check_germ_membership(1, phi_zero(1, 3))
        assert verdict == "member"
        assert germ.m == 1
        assert germ.r0 == 3
        assert germ.c_plus == CycValue.rational(Fraction(1))
        assert germ.c_minus == CycValue.rational(Fraction(1))

    def test_basic_data_model1_p5(self):
        germ, verdict = check_germ_membership(1, phi_zero(1, 5))
        assert verdict == "member"
        assert germ.c_plus == CycValue.rational(Fraction(1))
        assert germ.c_minus == CycValue.rational(Fraction(1))

    def test_basic_data_model6(self):
        germ, verdict = check_germ_membership(
            6, phi_zero(6, 3), phiprime_zero(6, 3)
        )
        assert verdict == "member"
        assert germ.c_plus == CycValue.rational(Fraction(1))
        assert germ.c_minus == CycValue.rational(Fraction(1))

    def test_basic_data_model5(self):
        germ, verdict = check_germ_membership(
            5, phi_zero(5, 3), phiprime_zero(5, 3)
        )
        assert verdict == "member"
        assert germ.c_plus == CycValue.rational(Fraction(1))
        assert germ.c_minus == CycValue.rational(Fraction(1))

    def test_identity_centered_weights_recovered(self):
        phi = ident_phi(1, 3)
        germ, verdict = check_germ_membership(1, phi)
        assert verdict == "member"
        assert germ.c_plus == CycValue.rational(Fraction(5, 2))
        assert germ.c_minus == CycValue.rational(Fraction(1, 3))
        assert germ.c_plus == i_singular(1, 1, phi)
        assert germ.c_minus == i_singular(1, -1, phi)

    def test_away_cell_has_zero_germ(self):
        spec = model_spec(1)
        centers = (Fraction(0), Fraction(2)) + (Fraction(0),) * (spec.n - 1)
        phi = CellFunction(
            3,
            1 + spec.n,
            [(Cell.make(3, centers, (0,) + (1,) * spec.n), Fraction(7))],
        )
        germ, verdict = check_germ_membership(1, phi)
        assert verdict == "member"
        assert germ.c_plus == CycValue.zero()
        assert germ.c_minus == CycValue.zero()

    def test_family_b_with_shifted_auxiliary(self):
        spec = model_spec(6)
        centers = tuple(
            Fraction(-1) if i in spec.sing_eps else Fraction(0)
            for i in range(spec.n)
        )
        phi = CellFunction(
            3,
            1 + spec.n,
            [(Cell.make(3, (Fraction(0),) + centers, (1,) + (1,) * spec.n), Fraction(7))],
        )
        fp = CellFunction(
            3,
            spec.y_dim,
            [(Cell.make(3, (Fraction(1), Fraction(0)), (1, 1)), Fraction(2))],
        )
        germ, verdict = check_germ_membership(6, phi, fp)
        assert verdict == "member"
        assert germ.c_plus == i_singular(6, 1, phi, fp)
        assert germ.c_minus == i_singular(6, -1, phi, fp)
        assert germ.c_plus == CycValue.zero()
        assert germ.c_minus != CycValue.zero()

    def test_below_regime_raises_mismatch_with_values(self):
        with pytest.raises(Mismatch) as exc:
            check_germ_membership(2, phi_zero(2, 5), r_probe=1, retries=0)
        err = exc.value
        assert err.left != err.right
        assert "model 2" in str(err)

    def test_retry_climbs_into_regime(self):
        germ, verdict = check_germ_membership(2, phi_zero(2, 5), r_probe=1, retries=1)
        assert verdict == "member"
        assert germ.r0 == 3

    def test_units_parameter_limits_pool(self):
        germ, verdict = check_germ_membership(1, phi_zero(1, 3), units=1)
        assert verdict == "member"


def three_cell_step(p: int = 3) -> CellFunction:
    return CellFunction(
        p,
        1,
        [
            (Cell.make(p, [Fraction(1, p)], [0]), Fraction(5, 2)),
            (Cell.make(p, [Fraction(2)], [1]), Fraction(-1)),
            (Cell.make(p, [Fraction(p**2)], [3]), Fraction(7)),
        ],
    )


class TestValidateStep:
    def test_wrong_arity(self):
        fn = CellFunction(3, 2, [(Cell.make(3, [1, 1], [1, 1]), Fraction(1))])
        with pytest.raises(ValueError):
            validate_step(fn)

    def test_cell_containing_zero(self):
        fn = CellFunction(3, 1, [(Cell.make(3, [Fraction(3)], [1]), Fraction(1))])
        with pytest.raises(ValueError):
            validate_step(fn)
        fn0 = CellFunction(3, 1, [(Cell.make(3, [Fraction(0)], [2]), Fraction(1))])
        with pytest.raises(ValueError):
            validate_step(fn0)

    def test_negative_valuation_center_ok(self):
        validate_step(three_cell_step())

    def test_probe_grid_shape(self):
        target = three_cell_step()
        grid = probe_grid(target)
        assert len(grid) == 7
        assert target.evaluate((grid[-1],)) == 0


class TestBuildPhi:
    def test_round_trip_model1(self):
        target = three_cell_step()
        phi = build_phi_from_step(1, target)
        assert phi.n == 1 + model_spec(1).n
        rows = verify_phi_against_step(1, target, phi)
        assert len(rows) == 7
        for a, want, got, ok in rows:
            assert ok, (a, want.describe(), got.describe())

    def test_round_trip_model2_p5(self):
        target = CellFunction(
            5,
            1,
            [
                (Cell.make(5, [Fraction(1, 5)], [0]), Fraction(-3, 4)),
                (Cell.make(5, [Fraction(5)], [2]), Fraction(2)),
            ],
        )
        phi = build_phi_from_step(2, target)
        rows = verify_phi_against_step(2, target, phi)
        for a, want, got, ok in rows:
            assert ok, (a, want.describe(), got.describe())

    def test_family_b_rejected(self):
        with pytest.raises(FamilyMismatch):
            build_phi_from_step(6, three_cell_step())

    def test_bad_step_rejected(self):
        fn = CellFunction(3, 1, [(Cell.make(3, [Fraction(3)], [1]), Fraction(1))])
        with pytest.raises(ValueError):
            build_phi_from_step(1, fn)


class TestBuildFprime:
    def test_round_trip(self):
        target = three_cell_step()
        fp = build_fprime_from_step(3, target)
        assert fp.kind == "bruhat-boxes"
        rows = verify_fprime_against_step(target, fp)
        assert len(rows) == 7
        for a, want, got, ok in rows:
            assert ok, (a, want.describe(), got.describe())

    def test_round_trip_deeper_ball(self):
        target = three_cell_step()
        fp = build_fprime_from_step(3, target, ball_level=1)
        for a, want, got, ok in verify_fprime_against_step(target, fp):
            assert ok, (a, want.describe(), got.describe())

    def test_round_trip_p5(self):
        target = CellFunction(
            5,
            1,
            [(Cell.make(5, [Fraction(2, 5)], [1]), Fraction(9, 7))],
        )
        fp = build_fprime_from_step(5, target)
        for a, want, got, ok in verify_fprime_against_step(target, fp):
            assert ok, (a, want.describe(), got.describe())

    def test_bad_step_rejected(self):
        fn = CellFunction(3, 1, [(Cell.make(3, [Fraction(0)], [1]), Fraction(1))])
        with pytest.raises(ValueError):
            build_fprime_from_step(3, fn)

    def test_values_off_grid_match_too(self):
        # j_orbital of the construction is the step value at any parameter,
        # not only at probe points
        target = three_cell_step()
        fp = build_fprime_from_step(3, target)
        for a in (Fraction(4, 3), Fraction(5), Fraction(81), Fraction(1, 9)):
            got = j_orbital(fp, a)
            assert got == CycValue.rational(target.evaluate((a,))), a
