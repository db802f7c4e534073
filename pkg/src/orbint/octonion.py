"""Split octonions as 2x2 vector matrices over an arbitrary base ring.

An element is an 8-tuple ``(a, v1, v2, v3, b, w1, w2, w3)`` standing for the
block matrix with scalars ``a, b`` on the diagonal and 3-vectors ``v, w``
off it.  Entries only need ``+``, ``-`` and ``*`` with each other and with
Python ints, so the same code runs on ints, Fractions and sparse
polynomials.  The quadratic norm ``n(x) = a*b - v.w`` is multiplicative and
``x`` satisfies ``x^2 - t(x) x + n(x) = 0`` with trace ``t(x) = a + b``.
"""

from typing import Sequence, Tuple

Oct = Tuple  # 8-tuple of ring elements


def _dot(u: Sequence, v: Sequence):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _cross(u: Sequence, v: Sequence):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def oct_mul(x: Oct, y: Oct) -> Oct:
    """Product of two vector matrices."""
    a1, b1 = x[0], x[4]
    v1, w1 = x[1:4], x[5:8]
    a2, b2 = y[0], y[4]
    v2, w2 = y[1:4], y[5:8]
    a = a1 * a2 + _dot(v1, w2)
    b = b1 * b2 + _dot(w1, v2)
    cv = _cross(w1, w2)
    cw = _cross(v1, v2)
    v = tuple(a1 * v2[i] + b2 * v1[i] - cv[i] for i in range(3))
    w = tuple(a2 * w1[i] + b1 * w2[i] + cw[i] for i in range(3))
    return (a, *v, b, *w)


def oct_conj(x: Oct) -> Oct:
    """Conjugate: swap the diagonal, negate both vectors."""
    return (x[4], -x[1], -x[2], -x[3], x[0], -x[5], -x[6], -x[7])


def oct_trace(x: Oct):
    return x[0] + x[4]


def oct_norm(x: Oct):
    """Multiplicative quadratic form n(x) = a*b - v.w."""
    return x[0] * x[4] - _dot(x[1:4], x[5:8])


def oct_add(x: Oct, y: Oct) -> Oct:
    return tuple(x[i] + y[i] for i in range(8))


def oct_sub(x: Oct, y: Oct) -> Oct:
    return tuple(x[i] - y[i] for i in range(8))


def oct_scale(x: Oct, c) -> Oct:
    return tuple(e * c for e in x)


def oct_one() -> Oct:
    return (1, 0, 0, 0, 1, 0, 0, 0)


def oct_zero() -> Oct:
    return (0,) * 8
