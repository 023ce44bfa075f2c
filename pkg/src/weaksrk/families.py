"""Coefficient families of explicit weak SRK methods with minimal stage number.

* :func:`make_order11` builds the one-stage order (1,1) family (Euler-Maruyama).
* :func:`make_order21` builds the two-stage order (2,1) family.
* :func:`make_order22` builds every solvable three-stage order (2,2) case.
* :func:`dri1` and :func:`dri1_m_variant` return the optimized RK32 extension.

Free parameters are named ``c2, c3, ...`` as in the classification; ``c1`` is
the sign (+1 or -1) fixing ``beta1' e``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConstraintViolation, DomainError, InvalidSign, UnknownCase, VariantUnverified
from .order_conditions import classify, max_weak_residual
from .tableau import ButcherTableau, validate

SQRT6 = math.sqrt(6.0)
ZERO_TOL = 1e-12


def _check_sign(c1) -> int:
    if c1 not in (-1, 1):
        raise InvalidSign(f"c1 must be -1 or +1, got {c1!r}")
    return int(c1)


def _is_zero(x: float, *scale: float) -> bool:
    return abs(x) <= ZERO_TOL * max((1.0,) + tuple(abs(v) for v in scale))


def _lower(s: int, entries: Mapping[tuple[int, int], float]) -> list[list[float]]:
    mat = [[0.0] * s for _ in range(s)]
    for (i, j), v in entries.items():
        mat[i][j] = v
    return mat


# -- order (1,1) and (2,1) ----------------------------------------------------


def make_order11(c1: int = 1) -> ButcherTableau:
    """One-stage family; coincides with the Euler-Maruyama scheme."""
    c1 = _check_sign(c1)
    return validate(
        {"name": f"order11(c1={c1:+d})", "s": 1, "alpha": [1.0], "beta1": [float(c1)]}
    )


def euler() -> ButcherTableau:
    t = make_order11(1)
    return t.replace(name="euler")


ORDER21_PARAMS = tuple(f"c{i}" for i in range(2, 18))


def make_order21(c1: int = 1, params: Mapping[str, float] | None = None, **kw) -> ButcherTableau:
    """Two-stage family of deterministic order 2 and weak order 1.

    Unspecified parameters default to 0; ``c2`` is required.
    """
    c1 = _check_sign(c1)
    p = _collect(params, kw, ORDER21_PARAMS)
    if "c2" not in p:
        raise ConstraintViolation("c2 ≠ 0 (c2 is required)")
    c = {name: float(p.get(name, 0.0)) for name in ORDER21_PARAMS}
    if c["c2"] == 0.0:
        raise ConstraintViolation("c2 ≠ 0")
    if not _is_zero(c["c4"] * c["c17"]):
        raise ConstraintViolation("c4·c17 = 0")
    d_b2 = c["c13"] + c["c14"] - c["c15"] - c["c16"]
    if not _is_zero(c["c6"] * d_b2, c["c13"], c["c14"], c["c15"], c["c16"]):
        raise ConstraintViolation("c6·(c13+c14-c15-c16) = 0")
    d_a2 = c["c9"] + c["c10"] - c["c11"] - c["c12"]
    if not _is_zero(c["c7"] * d_a2, c["c9"], c["c10"], c["c11"], c["c12"]):
        raise ConstraintViolation("c7·(c9+c10-c11-c12) = 0")
    sq = (c["c13"] + c["c14"]) ** 2 - (c["c15"] + c["c16"]) ** 2
    if not _is_zero(c["c7"] * sq, c["c13"] ** 2, c["c14"] ** 2, c["c15"] ** 2, c["c16"] ** 2):
        raise ConstraintViolation("c7·((c13+c14)²-(c15+c16)²) = 0")

    return validate(
        {
            "name": "order21",
            "s": 2,
            "alpha": [1.0 - 1.0 / (2.0 * c["c2"]), 1.0 / (2.0 * c["c2"])],
            "beta1": [c1 - c["c4"], c["c4"]],
            "beta2": [c["c5"], -c["c5"]],
            "beta3": [c["c6"], -c["c6"]],
            "beta4": [c["c7"], -c["c7"]],
            "A0": _lower(2, {(1, 0): c["c2"]}),
            "A1": _lower(2, {(1, 0): c["c8"]}),
            "A2": [[c["c9"], c["c10"]], [c["c11"], c["c12"]]],
            "B0": _lower(2, {(1, 0): c["c3"]}),
            "B1": _lower(2, {(1, 0): c["c17"]}),
            "B2": [[c["c13"], c["c14"]], [c["c15"], c["c16"]]],
        }
    )


def _collect(params, kw, allowed) -> dict[str, float]:
    p = dict(params or {})
    p.update(kw)
    unknown = sorted(set(p) - set(allowed))
    if unknown:
        raise ConstraintViolation(f"unknown parameter(s) {', '.join(unknown)}")
    return {k: float(v) for k, v in p.items()}


# -- order (2,2) ---------------------------------------------------------------


def _shared_order22(c1, c2, c3, c4, c5) -> dict:
    q3 = c3 * c3
    q4 = c4 * c4
    return {
        "beta1": [c1 - c1 / (2 * q3), c1 / (4 * q3), c1 / (4 * q3)],
        "beta2": [0.0, 1 / (2 * c3), -1 / (2 * c3)],
        "beta3": [-c1 / (2 * q4), c1 / (4 * q4), c1 / (4 * q4)],
        "beta4": [0.0, 1 / (2 * c4), -1 / (2 * c4)],
        "A1": [[0.0, 0.0, 0.0], [q3, 0.0, 0.0], [q3 - c2, c2, 0.0]],
        "B1": [[0.0, 0.0, 0.0], [c3, 0.0, 0.0], [-c3, 0.0, 0.0]],
        "B2": [[0.0, 0.0, 0.0], [c4 + 2 * c5, -c5, -c5], [-c4 - 2 * c5, c5, c5]],
    }


def _z3(row2, row3) -> list[list[float]]:
    """Strictly lower 3x3 matrix from row 2 (one entry) and row 3 (two entries)."""
    return [[0.0, 0.0, 0.0], [row2, 0.0, 0.0], [row3[0], row3[1], 0.0]]


# Each builder returns alpha, A0, B0, A2 for the case.
def _case_1ai(c1, c):
    return (
        [0.5 - c[11], c[11], 0.5],
        _z3(0.0, (c[12], 1 - c[12])),
        _z3(0.0, (c1, 0.0)),
        [[c[6] - c[7], c[7], c[8]], [c[6] - c[9], c[9], c[8]], [c[6] - c[10], c[10], c[8]]],
    )


def _case_1aii(c1, c):
    return (
        [0.5 - c[10], c[10], 0.5],
        _z3((1 - c[11]) / (2 * c[10]), (c[11] - c[12], c[12])),
        _z3(0.0, (c1, 0.0)),
        [[c[6] - c[7], c[7], c[8]], [c[6] - c[9], c[9], c[8]], [c[6] - c[9], c[9], c[8]]],
    )


def _case_1aiii(c1, c):
    return (
        [0.5, 0.0, 0.5],
        _z3(c[10], (1 - c[11], c[11])),
        _z3(0.0, (c1, 0.0)),
        [[c[6] - c[7], c[7], c[8]], [c[6] - c[9], c[9], c[8]], [c[6] - c[9], c[9], c[8]]],
    )


def _case_2ai(c1, c):
    return (
        [0.5 - c[11], 0.5, c[11]],
        _z3(1.0, (c[12], -c[12])),
        _z3(c1, (0.0, 0.0)),
        [[c[6] - c[8], c[7], c[8]], [c[6] - c[9], c[7], c[9]], [c[6] - c[10], c[7], c[10]]],
    )


def _case_2aii(c1, c):
    return (
        [0.5 - c[10], 0.5, c[10]],
        _z3(1 - 2 * c[10] * c[11], (c[11] - c[12], c[12])),
        _z3(c1, (0.0, 0.0)),
        [[c[6] - c[8], c[7], c[8]], [c[6] - c[9], c[7], c[9]], [c[6] - c[9], c[7], c[9]]],
    )


def _case_2bi(c1, c):
    return (
        [0.5, 0.5, 0.0],
        _z3(1.0, (c[11], -c[11])),
        _z3(c1, (c[10], -c[10])),
        [
            [c[6] - c[8], c[7], c[8]],
            [c[6] - c[9], c[7], c[9]],
            [c[6] - 2 * c[8] + c[9], c[7], 2 * c[8] - c[9]],
        ],
    )


def _case_bii(c1, c):
    # shared by 2bii (c9 = 0), 3bii (c9 = c1) and 4bii (c9 not in {0, c1})
    return (
        [0.5, 0.5, 0.0],
        _z3(1.0, (c[11], c[12])),
        _z3(c1, (c[9] - c[10], c[10])),
        [[c[6], c[7], c[8]]] * 3,
    )


def _case_3ai(c1, c):
    return (
        [0.5, 0.5 - c[11], c[11]],
        _z3(1.0, (1 - c[12], c[12])),
        _z3(c1, (c1, 0.0)),
        [
            [c[6], c[7], c[8]],
            [c[6], c[9], c[7] + c[8] - c[9]],
            [c[6], c[10], c[7] + c[8] - c[10]],
        ],
    )


def _case_3aii(c1, c):
    return (
        [0.5, 0.5 - c[10], c[10]],
        _z3((1 - 2 * c[10] * c[11]) / (1 - 2 * c[10]), (c[11] - c[12], c[12])),
        _z3(c1, (c1, 0.0)),
        [
            [c[6], c[7], c[8]],
            [c[6], c[9], c[7] + c[8] - c[9]],
            [c[6], c[9], c[7] + c[8] - c[9]],
        ],
    )


def _case_aiii(c1, c):
    # shared by 3aiii (c10 = c1) and 4aiii (c10 not in {0, c1})
    r = c1 / c[10]
    return (
        [0.5, 0.0, 0.5],
        _z3(c[11], (1 - c[12], c[12])),
        _z3(c[10], (c1, 0.0)),
        [
            [c[6] + (c[9] - c[7]) * (1 - r), c[8] + (c[9] - c[7]) * r, c[7]],
            [c[6], c[8], c[9]],
            [c[6], c[8], c[9]],
        ],
    )


def _case_3bi(c1, c):
    return (
        [0.5, 0.5, 0.0],
        _z3(1.0, (1 - c[11], c[11])),
        _z3(c1, (c1 - c[10], c[10])),
        [
            [c[6], c[7], c[8]],
            [c[6], c[9], c[7] + c[8] - c[9]],
            [c[6], 2 * c[7] - c[9], c[9] + c[8] - c[7]],
        ],
    )


def _case_4aii(c1, c):
    c10, c11, c12, c13 = c[10], c[11], c[12], c[13]
    alpha = [
        1 + (1 - c1 * (c10 + c11)) / (2 * c10 * c11),
        0.5 * (1 - c1 * c11) / (c10 * (c10 - c11)),
        -0.5 * (1 - c1 * c10) / (c11 * (c10 - c11)),
    ]
    a021 = (c10 / c11) * (c11 * (c11 - c10) - c12 * (1 - c1 * c10)) / (c1 * c11 - 1)
    r = c11 / c10
    return (
        alpha,
        _z3(a021, (c12 - c13, c13)),
        _z3(c10, (c11, 0.0)),
        [
            [c[6] + (c[9] - c[7]) * (1 - r), c[8] + (c[9] - c[7]) * r, c[7]],
            [c[6], c[8], c[9]],
            [c[6], c[8], c[9]],
        ],
    )


@dataclass(frozen=True)
class Order22Case:
    """Parameter layout of one solvable (2,2) case.

    ``nonzero`` lists callables ``(c1, c) -> value`` that must stay away from
    zero, with a label used in error messages; ``fixed`` pins parameters that
    depend on ``c1``.
    """

    case_id: str
    free: tuple[int, ...]
    builder: Callable
    nonzero: tuple[tuple[str, Callable[[int, dict], float]], ...] = ()
    fixed: Callable[[int], dict[int, float]] | None = None
    c2_free: bool = False


def _rng(lo, hi):
    return tuple(range(lo, hi + 1))


ORDER22_CASES: dict[str, Order22Case] = {
    case.case_id: case
    for case in (
        Order22Case("1ai", _rng(6, 12), _case_1ai, (("c9 ≠ c10", lambda c1, c: c[9] - c[10]),), c2_free=True),
        Order22Case("1aii", _rng(6, 12), _case_1aii, (("c10 ≠ 0", lambda c1, c: c[10]),), c2_free=True),
        Order22Case("1aiii", _rng(6, 11), _case_1aiii, c2_free=True),
        Order22Case("2ai", _rng(6, 12), _case_2ai, (("c9 ≠ c10", lambda c1, c: c[9] - c[10]),)),
        Order22Case("2aii", _rng(6, 12), _case_2aii),
        Order22Case("2bi", _rng(6, 11), _case_2bi, (("c8 ≠ c9", lambda c1, c: c[8] - c[9]),)),
        Order22Case("2bii", (6, 7, 8, 10, 11, 12), _case_bii, fixed=lambda c1: {9: 0.0}),
        Order22Case("3ai", _rng(6, 12), _case_3ai, (("c9 ≠ c10", lambda c1, c: c[9] - c[10]),)),
        Order22Case("3aii", _rng(6, 12), _case_3aii, (("c10 ≠ 1/2", lambda c1, c: c[10] - 0.5),)),
        Order22Case("3aiii", (6, 7, 8, 9, 11, 12), _case_aiii, fixed=lambda c1: {10: float(c1)}),
        Order22Case("3bi", _rng(6, 11), _case_3bi, (("c7 ≠ c9", lambda c1, c: c[7] - c[9]),)),
        Order22Case("3bii", (6, 7, 8, 10, 11, 12), _case_bii, fixed=lambda c1: {9: float(c1)}),
        Order22Case(
            "4aii",
            _rng(6, 13),
            _case_4aii,
            (
                ("c10 ≠ 0", lambda c1, c: c[10]),
                ("c11 ≠ 0", lambda c1, c: c[11]),
                ("c10 ≠ c11", lambda c1, c: c[10] - c[11]),
                ("c11 ≠ c1", lambda c1, c: c[11] - c1),
            ),
        ),
        Order22Case(
            "4aiii",
            _rng(6, 12),
            _case_aiii,
            (("c10 ≠ 0", lambda c1, c: c[10]), ("c10 ≠ c1", lambda c1, c: c[10] - c1)),
        ),
        Order22Case(
            "4bii",
            _rng(6, 12),
            _case_bii,
            (("c9 ≠ 0", lambda c1, c: c[9]), ("c9 ≠ c1", lambda c1, c: c[9] - c1)),
        ),
    )
}

UNSOLVABLE_CASES = ("1bi", "1bii", "1biii", "2aiii", "2biii", "3biii", "4ai", "4bi", "4biii")


def _case(case_id: str) -> Order22Case:
    try:
        return ORDER22_CASES[case_id]
    except KeyError:
        if case_id in UNSOLVABLE_CASES:
            raise UnknownCase(
                f"case {case_id} has no solution in the order (2,2) classification"
            ) from None
        raise UnknownCase(
            f"unknown case {case_id!r}; solvable cases: {', '.join(ORDER22_CASES)}"
        ) from None


def order22_parameter_names(case_id: str) -> tuple[str, ...]:
    case = _case(case_id)
    shared = ("c2", "c3", "c4", "c5") if case.c2_free else ("c3", "c4", "c5")
    return shared + tuple(f"c{i}" for i in case.free)


def make_order22(
    case_id: str, c1: int = 1, params: Mapping[str, float] | None = None, **kw
) -> ButcherTableau:
    """Three-stage method of order (2,2) from one case of the classification.

    ``c3`` and ``c4`` are required (both nonzero); other parameters default
    to 0.  ``c2`` may only be nonzero in the cases 1ai, 1aii and 1aiii.
    Parameters pinned by the case (``c9`` in 2bii/3bii, ``c10`` in 3aiii)
    are filled in and must match if supplied.
    """
    c1 = _check_sign(c1)
    case = _case(case_id)
    allowed = {"c2", "c3", "c4", "c5"} | {f"c{i}" for i in case.free}
    fixed = case.fixed(c1) if case.fixed else {}
    allowed |= {f"c{i}" for i in fixed}
    p = _collect(params, kw, allowed)

    for name in ("c3", "c4"):
        if name not in p or p[name] == 0.0:
            raise ConstraintViolation(f"{name} ≠ 0")
    if not case.c2_free and p.get("c2", 0.0) != 0.0:
        raise ConstraintViolation(f"c2 = 0 in case {case_id}")
    for idx, val in fixed.items():
        given = p.get(f"c{idx}", val)
        if not _is_zero(given - val, val):
            raise ConstraintViolation(f"c{idx} = {val:g} in case {case_id}")

    c = {i: 0.0 for i in range(2, 14)}
    c.update({int(k[1:]): v for k, v in p.items()})
    c.update(fixed)
    for label, quantity in case.nonzero:
        if quantity(c1, c) == 0.0:
            raise ConstraintViolation(f"{label} in case {case_id}")

    alpha, A0, B0, A2 = case.builder(c1, c)
    raw = {"name": f"order22-{case_id}", "s": 3, "alpha": alpha, "A0": A0, "B0": B0, "A2": A2}
    raw.update(_shared_order22(c1, c[2], c[3], c[4], c[5]))
    return validate(raw)


def _draw(rng: np.random.Generator, lo=0.1, hi=2.0) -> float:
    return float(rng.choice((-1.0, 1.0)) * rng.uniform(lo, hi))


def sample_order22_params(
    case_id: str, rng: np.random.Generator, c1: int = 1, margin: float = 0.05
) -> dict[str, float]:
    """Admissible random parameters for a case.

    Values are uniform on [-2, -0.1] ∪ [0.1, 2]; draws whose excluded
    quantities come within ``margin`` of zero are rejected.
    """
    case = _case(case_id)
    fixed = case.fixed(c1) if case.fixed else {}
    while True:
        c = {i: 0.0 for i in range(2, 14)}
        c.update({i: _draw(rng) for i in (3, 4, 5) + case.free})
        if case.c2_free:
            c[2] = _draw(rng)
        c.update(fixed)
        if all(abs(q(c1, c)) >= margin for _, q in case.nonzero):
            names = order22_parameter_names(case_id)
            return {n: c[int(n[1:])] for n in names}


def sample_order21_params(rng: np.random.Generator) -> dict[str, float]:
    """Random admissible (2,1) parameters; each product constraint is met by
    zeroing one of its factors at random."""
    c = {f"c{i}": _draw(rng) for i in range(2, 18)}
    if rng.random() < 0.5:
        c["c4"] = 0.0
    else:
        c["c17"] = 0.0
    if rng.random() < 0.5:
        c["c6"] = 0.0
    else:
        c["c15"] = c["c13"] + c["c14"] - c["c16"]
    if rng.random() < 0.5:
        c["c7"] = 0.0
    else:
        c["c11"] = c["c9"] + c["c10"] - c["c12"]
        c["c15"] = c["c13"] + c["c14"] - c["c16"]
    return c


# -- DRI1 ----------------------------------------------------------------------


def dri1_parameters() -> dict[str, float]:
    """Case 4aii parameters that reproduce DRI1 (c1 = +1, minus branch)."""
    q = math.sqrt(221 / 4955)
    return {
        "c3": 3 * math.sqrt(38 / 491),
        "c4": -4 * q,
        "c5": 491 / 513 * q,
        "c6": 0.0,
        "c7": 0.0,
        "c8": 0.0,
        "c9": 0.0,
        "c10": (6 - SQRT6) / 10,
        "c11": (3 + 2 * SQRT6) / 5,
        "c12": 1.0,
        "c13": 2.0,
    }


def dri1() -> ButcherTableau:
    """The order (3,2) scheme DRI1, built from exact surd expressions."""
    r1 = 3 * math.sqrt(38 / 491)
    r2 = math.sqrt(491 / 38) / 6
    r3 = math.sqrt(4955 / 221) / 8
    p = 214 / 513 * math.sqrt(1105 / 991)
    q = 491 / 513 * math.sqrt(221 / 4955)
    return validate(
        {
            "name": "dri1",
            "s": 3,
            "alpha": [1 / 6, 2 / 3, 1 / 6],
            "beta1": [193 / 684, 491 / 1368, 491 / 1368],
            "beta2": [0.0, r2, -r2],
            "beta3": [-4955 / 7072, 4955 / 14144, 4955 / 14144],
            "beta4": [0.0, -r3, r3],
            "A0": _z3(0.5, (-1.0, 2.0)),
            "B0": _z3((6 - SQRT6) / 10, ((3 + 2 * SQRT6) / 5, 0.0)),
            "A1": _z3(342 / 491, (342 / 491, 0.0)),
            "B1": _z3(r1, (-r1, 0.0)),
            "A2": [[0.0] * 3] * 3,
            "B2": [[0.0, 0.0, 0.0], [-p, -q, -q], [p, q, q]],
        }
    )


def _variant_row1_readings():
    """Candidate readings of the printed first row of the m > 1 drift matrix.

    The printed middle denominator ``(-6 sqrt6)`` and the unbalanced
    parenthesis in the third entry admit several readings; each is tried.
    """
    first = 2 * (-3442595658 + 1259007085 * SQRT6) / (1554073317 * (-6 + SQRT6))
    third = 4 * (-1111473969 + 371403611 * SQRT6) / 23311099755
    num = -8 * (212963260 + 73915807 * SQRT6)
    middles = {
        "(-6*sqrt6) as printed": num / (1554073317 * (-6 * SQRT6)),
        "(-6+sqrt6)": num / (1554073317 * (-6 + SQRT6)),
    }
    for label, middle in middles.items():
        yield label, [first, middle, third]


def dri1_m_variant(tol: float = 1e-10) -> ButcherTableau:
    """DRI1 with the optimized nonzero drift matrix for the hat stages.

    Rows 2 and 3 of the matrix are exact; row 1 is taken from the first
    printed reading that keeps every weak condition and gives row sums 2/3.
    """
    row23 = [2 / 27 * (7 - 2 * SQRT6), 8 / 81 * (3 + SQRT6), 4 / 81 * (-3 + SQRT6)]
    base = dri1()
    for label, row1 in _variant_row1_readings():
        cand = base.replace(name="dri1-m", A2=[row1, row23, row23])
        rows_ok = np.all(np.abs(cand.c2 - 2 / 3) <= tol)
        if rows_ok and max_weak_residual(cand) <= tol and classify(cand, tol).deterministic_order == 3:
            return cand
    raise VariantUnverified("no reading of the first drift row satisfies the order conditions")


# -- local error constant --------------------------------------------------------

LEC_NUM_CONST = 60500644673 + 24530366872 * SQRT6
LEC_FACTOR = 217 + 88 * SQRT6
LEC_DENOM = 24000000 * (24 + 11 * SQRT6) ** 2
LEC_G_LINEAR = 128250000
LEC_G_QUADRATIC = 92062500
PLUS_BRANCH_ANCHOR = 1.296


@dataclass(frozen=True)
class LecEvaluation:
    c3: float | None
    branch: str
    value: float
    anchor_only: bool = False


def _g(x: float) -> float:
    return LEC_G_LINEAR * x - LEC_G_QUADRATIC * x * x


def lec_norm_squared(c3: float) -> float:
    return (LEC_NUM_CONST - LEC_FACTOR * _g(c3 * c3)) / LEC_DENOM


def lec_norm(c3: float | None = None, branch: str = "minus") -> LecEvaluation:
    """Euclidean norm of the leading local error coefficients for m = 1.

    Only the minus branch (c10 = (6 - sqrt6)/10) has a closed form in c3.
    The plus branch is known only through its minimized value, returned with
    ``anchor_only=True``.
    """
    if branch == "plus":
        if c3 is not None:
            raise DomainError("plus branch has no closed form; only its minimum is known")
        return LecEvaluation(None, "plus", PLUS_BRANCH_ANCHOR, anchor_only=True)
    if branch != "minus":
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    if c3 is None or c3 == 0.0:
        raise DomainError("c3 must be nonzero")
    sq = lec_norm_squared(c3)
    if sq < 0:
        raise DomainError(f"negative squared norm {sq!r} at c3={c3!r}")
    return LecEvaluation(float(c3), "minus", math.sqrt(sq))


def optimal_c3_exact() -> Fraction:
    """Squared optimal c3 as an exact rational (stationary point of g)."""
    return Fraction(LEC_G_LINEAR, 2 * LEC_G_QUADRATIC)


def minimize_lec(branch: str = "minus") -> tuple[float | None, float]:
    """Minimize the error constant over c3 > 0.

    The stationary point of the squared norm is located numerically and
    checked against the exact rational answer.
    """
    if branch == "plus":
        return None, PLUS_BRANCH_ANCHOR

    def dsq(c3):
        return -LEC_FACTOR * (2 * LEC_G_LINEAR * c3 - 4 * LEC_G_QUADRATIC * c3**3) / LEC_DENOM

    numeric = brentq(dsq, 0.1, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    exact = math.sqrt(optimal_c3_exact())
    if abs(numeric - exact) > 1e-12:
        raise AssertionError(f"numeric minimizer {numeric!r} disagrees with {exact!r}")
    return exact, lec_norm(exact).value
