"""Order conditions for weak orders one and two, plus classical RK conditions.

Each weak condition is stored as ``(index, description, lhs, rhs)`` where
``lhs`` maps a tableau to a float.  Vector products are component-wise and
``e`` is the all-ones vector.  Conditions written as products, for example
``(beta1' e)(alpha' B0 e) = 1/2``, are evaluated in that product form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .tableau import ButcherTableau

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ConditionResidual:
    index: int | str
    description: str
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def passes(self, tol: float) -> bool:
        return abs(self.residual) <= tol


@dataclass(frozen=True)
class OrderReport:
    weak_order: int
    deterministic_order: int
    residuals: tuple[ConditionResidual, ...]
    tol: float

    @property
    def failing(self) -> list[int | str]:
        return [r.index for r in self.residuals if not r.passes(self.tol)]

    def summary(self) -> str:
        return f"weak={self.weak_order} det={self.deterministic_order}"


class _Terms:
    """Frequently reused tableau products, computed once per evaluation."""

    def __init__(self, t: ButcherTableau):
        self.a = t.alpha
        self.b1, self.b2, self.b3, self.b4 = t.beta1, t.beta2, t.beta3, t.beta4
        self.A0, self.A1, self.A2 = t.A0, t.A1, t.A2
        self.B0, self.B1, self.B2 = t.B0, t.B1, t.B2
        e = np.ones(t.s)
        self.e = e
        self.A0e, self.A1e, self.A2e = t.A0 @ e, t.A1 @ e, t.A2 @ e
        self.B0e, self.B1e, self.B2e = t.B0 @ e, t.B1 @ e, t.B2 @ e
        self.b1e = float(t.beta1 @ e)


_Lhs = Callable[[_Terms], float]

# fmt: off
WEAK_CONDITIONS: tuple[tuple[int, str, _Lhs, float], ...] = (
    (1, "alpha' e = 1", lambda q: q.a @ q.e, 1.0),
    (2, "beta4' e = 0", lambda q: q.b4 @ q.e, 0.0),
    (3, "beta3' e = 0", lambda q: q.b3 @ q.e, 0.0),
    (4, "(beta1' e)^2 = 1", lambda q: q.b1e ** 2, 1.0),
    (5, "beta2' e = 0", lambda q: q.b2 @ q.e, 0.0),
    (6, "beta1' B1 e = 0", lambda q: q.b1 @ q.B1e, 0.0),
    (7, "beta4' A2 e = 0", lambda q: q.b4 @ q.A2e, 0.0),
    (8, "beta3' B2 e = 0", lambda q: q.b3 @ q.B2e, 0.0),
    (9, "beta4' (B2 e)^2 = 0", lambda q: q.b4 @ q.B2e ** 2, 0.0),
    (10, "alpha' A0 e = 1/2", lambda q: q.a @ q.A0e, 0.5),
    (11, "alpha' (B0 e)^2 = 1/2", lambda q: q.a @ q.B0e ** 2, 0.5),
    (12, "(beta1' e)(alpha' B0 e) = 1/2", lambda q: q.b1e * (q.a @ q.B0e), 0.5),
    (13, "(beta1' e)(beta1' A1 e) = 1/2", lambda q: q.b1e * (q.b1 @ q.A1e), 0.5),
    (14, "beta3' A2 e = 0", lambda q: q.b3 @ q.A2e, 0.0),
    (15, "beta2' B1 e = 1", lambda q: q.b2 @ q.B1e, 1.0),
    (16, "beta4' B2 e = 1", lambda q: q.b4 @ q.B2e, 1.0),
    (17, "(beta1' e)(beta1' (B1 e)^2) = 1/2", lambda q: q.b1e * (q.b1 @ q.B1e ** 2), 0.5),
    (18, "(beta1' e)(beta3' (B2 e)^2) = 1/2", lambda q: q.b1e * (q.b3 @ q.B2e ** 2), 0.5),
    (19, "beta1' (B1 (B1 e)) = 0", lambda q: q.b1 @ (q.B1 @ q.B1e), 0.0),
    (20, "beta3' (B2 (B1 e)) = 0", lambda q: q.b3 @ (q.B2 @ q.B1e), 0.0),
    (21, "beta3' (B2 (B1 (B1 e))) = 0", lambda q: q.b3 @ (q.B2 @ (q.B1 @ q.B1e)), 0.0),
    (22, "beta1' (A1 (B0 e)) = 0", lambda q: q.b1 @ (q.A1 @ q.B0e), 0.0),
    (23, "beta3' (A2 (B0 e)) = 0", lambda q: q.b3 @ (q.A2 @ q.B0e), 0.0),
    (24, "beta4' (A2 e)^2 = 0", lambda q: q.b4 @ q.A2e ** 2, 0.0),
    (25, "beta4' (A2 (A0 e)) = 0", lambda q: q.b4 @ (q.A2 @ q.A0e), 0.0),
    (26, "alpha' (B0 (B1 e)) = 0", lambda q: q.a @ (q.B0 @ q.B1e), 0.0),
    (27, "beta2' A1 e = 0", lambda q: q.b2 @ q.A1e, 0.0),
    (28, "beta1' ((A1 e)(B1 e)) = 0", lambda q: q.b1 @ (q.A1e * q.B1e), 0.0),
    (29, "beta3' ((A2 e)(B2 e)) = 0", lambda q: q.b3 @ (q.A2e * q.B2e), 0.0),
    (30, "beta4' (A2 (B0 e)) = 0", lambda q: q.b4 @ (q.A2 @ q.B0e), 0.0),
    (31, "beta2' (A1 (B0 e)) = 0", lambda q: q.b2 @ (q.A1 @ q.B0e), 0.0),
    (32, "beta4' ((B2 e)^2 (A2 e)) = 0", lambda q: q.b4 @ (q.B2e ** 2 * q.A2e), 0.0),
    (33, "beta4' (A2 (B0 e)^2) = 0", lambda q: q.b4 @ (q.A2 @ q.B0e ** 2), 0.0),
    (34, "beta2' (A1 (B0 e)^2) = 0", lambda q: q.b2 @ (q.A1 @ q.B0e ** 2), 0.0),
    (35, "beta1' (B1 (A1 e)) = 0", lambda q: q.b1 @ (q.B1 @ q.A1e), 0.0),
    (36, "beta3' (B2 (A1 e)) = 0", lambda q: q.b3 @ (q.B2 @ q.A1e), 0.0),
    (37, "beta2' (B1 e)^2 = 0", lambda q: q.b2 @ q.B1e ** 2, 0.0),
    (38, "beta4' (B2 (B1 e)) = 0", lambda q: q.b4 @ (q.B2 @ q.B1e), 0.0),
    (39, "beta2' (B1 (B1 e)) = 0", lambda q: q.b2 @ (q.B1 @ q.B1e), 0.0),
    (40, "beta1' (B1 e)^3 = 0", lambda q: q.b1 @ q.B1e ** 3, 0.0),
    (41, "beta3' (B2 e)^3 = 0", lambda q: q.b3 @ q.B2e ** 3, 0.0),
    (42, "beta1' (B1 (B1 e)^2) = 0", lambda q: q.b1 @ (q.B1 @ q.B1e ** 2), 0.0),
    (43, "beta3' (B2 (B1 e)^2) = 0", lambda q: q.b3 @ (q.B2 @ q.B1e ** 2), 0.0),
    (44, "beta4' (B2 e)^4 = 0", lambda q: q.b4 @ q.B2e ** 4, 0.0),
    (45, "beta4' (B2 (B1 e))^2 = 0", lambda q: q.b4 @ (q.B2 @ q.B1e) ** 2, 0.0),
    (46, "beta4' ((B2 e)(B2 (B1 e))) = 0", lambda q: q.b4 @ (q.B2e * (q.B2 @ q.B1e)), 0.0),
    (47, "alpha' ((B0 e)(B0 (B1 e))) = 0", lambda q: q.a @ (q.B0e * (q.B0 @ q.B1e)), 0.0),
    (48, "beta1' ((A1 (B0 e))(B1 e)) = 0", lambda q: q.b1 @ ((q.A1 @ q.B0e) * q.B1e), 0.0),
    (49, "beta3' ((A2 (B0 e))(B2 e)) = 0", lambda q: q.b3 @ ((q.A2 @ q.B0e) * q.B2e), 0.0),
    (50, "beta1' (A1 (B0 (B1 e))) = 0", lambda q: q.b1 @ (q.A1 @ (q.B0 @ q.B1e)), 0.0),
    (51, "beta3' (A2 (B0 (B1 e))) = 0", lambda q: q.b3 @ (q.A2 @ (q.B0 @ q.B1e)), 0.0),
    (52, "beta4' ((B2 (A1 e))(B2 e)) = 0", lambda q: q.b4 @ ((q.B2 @ q.A1e) * q.B2e), 0.0),
    (53, "beta1' (B1 (A1 (B0 e))) = 0", lambda q: q.b1 @ (q.B1 @ (q.A1 @ q.B0e)), 0.0),
    (54, "beta3' (B2 (A1 (B0 e))) = 0", lambda q: q.b3 @ (q.B2 @ (q.A1 @ q.B0e)), 0.0),
    (55, "beta1' ((B1 e)(B1 (B1 e))) = 0", lambda q: q.b1 @ (q.B1e * (q.B1 @ q.B1e)), 0.0),
    (56, "beta3' ((B2 e)(B2 (B1 e))) = 0", lambda q: q.b3 @ (q.B2e * (q.B2 @ q.B1e)), 0.0),
    (57, "beta1' (B1 (B1 (B1 e))) = 0", lambda q: q.b1 @ (q.B1 @ (q.B1 @ q.B1e)), 0.0),
    (58, "beta4' ((B2 e)(B2 (B1 e)^2)) = 0", lambda q: q.b4 @ (q.B2e * (q.B2 @ q.B1e ** 2)), 0.0),
    (59, "beta4' ((B2 e)(B2 (B1 (B1 e)))) = 0",
     lambda q: q.b4 @ (q.B2e * (q.B2 @ (q.B1 @ q.B1e))), 0.0),
)

DETERMINISTIC_CONDITIONS: tuple[tuple[str, str, _Lhs, float], ...] = (
    ("D1", "alpha' e = 1", lambda q: q.a @ q.e, 1.0),
    ("D2", "alpha' A0 e = 1/2", lambda q: q.a @ q.A0e, 0.5),
    ("D3a", "alpha' (A0 e)^2 = 1/3", lambda q: q.a @ q.A0e ** 2, 1.0 / 3.0),
    ("D3b", "alpha' A0 A0 e = 1/6", lambda q: q.a @ (q.A0 @ q.A0e), 1.0 / 6.0),
)
# fmt: on

ORDER1_INDICES = tuple(range(1, 10))


def _evaluate(table, tableau) -> list[ConditionResidual]:
    q = _Terms(tableau)
    return [ConditionResidual(idx, desc, float(lhs(q)), rhs) for idx, desc, lhs, rhs in table]


def weak_residuals(tableau: ButcherTableau) -> list[ConditionResidual]:
    """All 59 weak order conditions, in index order."""
    return _evaluate(WEAK_CONDITIONS, tableau)


def deterministic_residuals(tableau: ButcherTableau) -> list[ConditionResidual]:
    """Classical RK conditions on (alpha, A0), tags D1, D2, D3a, D3b."""
    return _evaluate(DETERMINISTIC_CONDITIONS, tableau)


def max_weak_residual(tableau: ButcherTableau) -> float:
    return max(abs(r.residual) for r in weak_residuals(tableau))


def classify(tableau: ButcherTableau, tol: float = DEFAULT_TOL) -> OrderReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    weak = weak_residuals(tableau)
    det = deterministic_residuals(tableau)
    ok = {r.index: r.passes(tol) for r in weak + det}

    weak_order = 0
    if all(ok[i] for i in ORDER1_INDICES):
        weak_order = 1
        if all(ok[i] for i in range(10, 60)):
            weak_order = 2

    det_order = 0
    for p, tags in ((1, ("D1",)), (2, ("D2",)), (3, ("D3a", "D3b"))):
        if not all(ok[t] for t in tags):
            break
        det_order = p
    return OrderReport(weak_order, det_order, tuple(weak + det), tol)


def format_report(report: OrderReport) -> str:
    lines = [f"{'index':>5}  {'lhs':>22}  {'rhs':>10}  {'residual':>12}  result"]
    for r in report.residuals:
        verdict = "pass" if r.passes(report.tol) else "FAIL"
        lines.append(
            f"{str(r.index):>5}  {r.lhs:>22.15g}  {r.rhs:>10.6g}  {r.residual:>12.3e}  {verdict}"
        )
    lines.append(report.summary())
    return "\n".join(lines)
