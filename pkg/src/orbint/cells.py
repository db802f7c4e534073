"""Coset boxes in Q_p^n and locally constant functions built from them.

A :class:`Cell` is a product of cosets ``c_i + p^(m_i) Z_p``: the basic
compact-open box.  Centers are exact rationals with p-power denominators,
canonicalized modulo the level so equal boxes compare equal.  A
:class:`CellFunction` is a finite disjoint union of cells with rational
values — the exact, serializable test functions all integrals consume.

Normalization: ``vol(Z_p^n) = 1``, so ``vol(cell) = p^(-sum of levels)``.

The JSON schema round-trips bit-exactly::

    {"schema": "orbint-cellfn/1", "p": 3, "n": 2,
     "cells": [{"center": ["2*3^-1", "0"], "levels": [0, 1], "value": "1/3"}]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InsufficientPrecision, ParseError
from .padic import PAdic, fraction_val, vp


def _as_center(x, p: int, level: int) -> Fraction:
    """Coerce a coordinate to the canonical center of its coset mod p^level."""
    if isinstance(x, PAdic):
        if x.p != p:
            raise ValueError(f"center prime {x.p} != cell prime {p}")
        x = x.residue_class(level)  # raises InsufficientPrecision if too coarse
    x = Fraction(x)
    den = x.denominator
    k = vp(den, p) if den > 1 else 0
    if p**k != den:
        raise ValueError(f"center {x} does not lie in Q_{p} (denominator {den})")
    # canonical representative of x + p^level Z_p: numerator mod p^(level+k)
    if level + k <= 0:
        return Fraction(0)
    num = x.numerator % (p ** (level + k) * 1)
    return Fraction(num, den)


@dataclass(frozen=True)
class Cell:
    """A coset box: the product of the cosets centers[i] + p^levels[i] * Z_p."""

    p: int
    centers: tuple[Fraction, ...]
    levels: tuple[int, ...]

    @classmethod
    def make(cls, p: int, centers: Sequence, levels: Sequence[int]) -> "Cell":
        if len(centers) != len(levels):
            raise ValueError("centers and levels must have equal length")
        levels = tuple(int(m) for m in levels)
        if any(m < 0 for m in levels):
            raise ValueError("levels must be >= 0")
        cs = tuple(_as_center(c, p, m) for c, m in zip(centers, levels))
        return cls(p, cs, levels)

    @property
    def dim(self) -> int:
        return len(self.centers)

    def volume(self) -> Fraction:
        return Fraction(1, self.p ** sum(self.levels))

    def contains(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.dim:
            raise ValueError("dimension mismatch")
        for x, c, m in zip(point, self.centers, self.levels):
            if fraction_val(Fraction(x) - c, self.p) < m:
                return False
        return True

    def meets(self, other: "Cell") -> bool:
        """Whether two boxes intersect (coordinatewise coset intersection)."""
        if self.dim != other.dim or self.p != other.p:
            raise ValueError("cells not comparable")
        for c1, m1, c2, m2 in zip(self.centers, self.levels, other.centers, other.levels):
            if fraction_val(c1 - c2, self.p) < min(m1, m2):
                return False
        return True

    def drop_coord(self, i: int) -> "Cell":
        return Cell(
            self.p,
            self.centers[:i] + self.centers[i + 1 :],
            self.levels[:i] + self.levels[i + 1 :],
        )

    def coord_cell(self, i: int) -> tuple[Fraction, int]:
        return self.centers[i], self.levels[i]


def _center_str(c: Fraction, p: int) -> str:
    if c == 0:
        return "0"
    v = fraction_val(c, p)
    u = c / Fraction(p) ** v
    assert u.denominator == 1
    u = int(u)
    if v == 0:
        return str(u)
    return f"{u}*{p}^{v}"


def _parse_center(s: str, p: int) -> Fraction:
    s = s.strip()
    try:
        if "*" not in s:
            return Fraction(int(s))
        u_str, pow_str = s.split("*")
        base_str, exp_str = pow_str.split("^")
        if int(base_str) != p:
            raise ValueError
        return Fraction(int(u_str)) * Fraction(p) ** int(exp_str)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"bad center string {s!r}") from exc


class CellFunction:
    """A finite linear combination of disjoint cell indicators.

    Values are exact rationals; evaluation outside every cell is 0.
    """

    __slots__ = ("p", "n", "pieces")

    def __init__(self, p: int, n: int, pieces: Iterable[tuple[Cell, Fraction]]):
        pieces = [(cell, Fraction(v)) for cell, v in pieces]
        for cell, _ in pieces:
            if cell.p != p or cell.dim != n:
                raise ValueError("cell does not match the function's p or dimension")
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                if pieces[i][0].meets(pieces[j][0]):
                    raise ValueError(
                        f"cells {i} and {j} overlap; pieces must be disjoint"
                    )
        self.p = p
        self.n = n
        self.pieces = pieces

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        for cell, v in self.pieces:
            if cell.contains(point):
                return v
        return Fraction(0)

    def scale(self, q: Fraction) -> "CellFunction":
        return CellFunction(self.p, self.n, [(c, v * q) for c, v in self.pieces])

    def slice_first(self, a) -> "CellFunction":
        """Restrict the first coordinate to a fixed value.

        `a` may be a Fraction or a PAdic carrying enough digits to settle
        membership in every first-coordinate coset.
        """
        out = []
        for cell, v in self.pieces:
            c0, m0 = cell.coord_cell(0)
            if isinstance(a, PAdic):
                diff_val = (PAdic.from_rational(c0, self.p, max(m0, 1) + 2) - a).valuation
                if (a - PAdic.from_rational(c0, self.p, max(m0, 1) + 2)).abs_precision < m0:
                    raise InsufficientPrecision(
                        f"need a mod p^{m0} to slice, got {a!r}"
                    )
                inside = diff_val >= m0
            else:
                inside = fraction_val(Fraction(a) - c0, self.p) >= m0
            if inside:
                out.append((cell.drop_coord(0), v))
        return CellFunction(self.p, self.n - 1, out)

    def slice_coords(self, assignments: dict[int, Fraction]) -> "CellFunction":
        """Restrict several coordinates to fixed rational values.

        Cells whose cosets miss any assigned value are dropped; surviving
        cells are projected onto the unassigned coordinates (disjointness of
        the projections is inherited from the original cells).
        """
        fixed = sorted(assignments)
        out = []
        for cell, v in self.pieces:
            keep = True
            for i in fixed:
                c, m = cell.coord_cell(i)
                if fraction_val(Fraction(assignments[i]) - c, self.p) < m:
                    keep = False
                    break
            if not keep:
                continue
            reduced = cell
            for i in reversed(fixed):
                reduced = reduced.drop_coord(i)
            out.append((reduced, v))
        return CellFunction(self.p, self.n - len(fixed), out)

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        cells = []
        for cell, v in self.pieces:
            cells.append(
                {
                    "center": [_center_str(c, self.p) for c in cell.centers],
                    "levels": list(cell.levels),
                    "value": str(v),
                }
            )
        cells.sort(key=lambda d: (d["levels"], d["center"]))
        return {"schema": "orbint-cellfn/1", "p": self.p, "n": self.n, "cells": cells}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CellFunction":
        try:
            if doc["schema"] != "orbint-cellfn/1":
                raise ParseError(f"unknown schema {doc.get('schema')!r}")
            p = int(doc["p"])
            n = int(doc["n"])
            pieces = []
            for entry in doc["cells"]:
                centers = [_parse_center(s, p) for s in entry["center"]]
                levels = [int(m) for m in entry["levels"]]
                value = Fraction(entry["value"])
                pieces.append((Cell.make(p, centers, levels), value))
            return cls(p, n, pieces)
        except ParseError:
            raise
        except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed cell-function document: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "CellFunction":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return cls.from_json_dict(doc)

    def canonical_key(self) -> str:
        """Stable identity string (used for caching and determinism)."""
        return self.to_json()

    def __repr__(self) -> str:
        return f"CellFunction(p={self.p}, n={self.n}, {len(self.pieces)} cells)"


def indicator_lattice(p: int, n: int, level: int = 0) -> CellFunction:
    """The indicator of (p^level * Z_p)^n as a one-cell function."""
    cell = Cell.make(p, [0] * n, [level] * n)
    return CellFunction(p, n, [(cell, Fraction(1))])
