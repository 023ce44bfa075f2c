"""Extended Butcher tableaux for the weak SRK class and their execution plans.

A tableau holds the weights ``alpha, beta1..beta4`` and the stage matrices
``A0, A1, A2`` (drift) and ``B0, B1, B2`` (diffusion).  The node vectors
``c0, c1, c2`` are never supplied by the caller; they are the row sums of the
corresponding ``A`` matrix, accumulated left to right.

Tableau files are JSON documents::

    {"name": "dri1", "s": 3,
     "alpha": [...], "beta1": [...], ..., "beta4": [...],
     "A0": [[...], ...], ..., "B2": [[...], ...]}

Numbers may be JSON literals or strings with a small arithmetic grammar
(``"sqrt(38/491)*3"``, ``"(6-sqrt(6))/10"``) evaluated at load time.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .exceptions import (
    DimensionMismatch,
    ExplicitnessViolation,
    NonFiniteEntry,
    TableauError,
    TableauViolations,
)

VECTOR_KEYS = ("alpha", "beta1", "beta2", "beta3", "beta4")
MATRIX_KEYS = ("A0", "A1", "A2", "B0", "B1", "B2")
EXPLICIT_KEYS = ("A0", "A1", "B0", "B1")


def _row_sums(mat: np.ndarray) -> np.ndarray:
    out = np.empty(mat.shape[0])
    for i, row in enumerate(mat):
        acc = 0.0
        for v in row:
            acc += float(v)
        out[i] = acc
    return out


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """Validated coefficient set of an explicit s-stage SRK method.

    Build instances through :func:`validate` or :meth:`from_arrays`; both
    check dimensions, explicitness and finiteness.
    """

    s: int
    alpha: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    beta3: np.ndarray
    beta4: np.ndarray
    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    B0: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    name: str = "tableau"
    c0: np.ndarray = field(init=False)
    c1: np.ndarray = field(init=False)
    c2: np.ndarray = field(init=False)

    def __post_init__(self):
        for key in VECTOR_KEYS + MATRIX_KEYS:
            object.__setattr__(self, key, _frozen(getattr(self, key)))
        object.__setattr__(self, "c0", _frozen(_row_sums(self.A0)))
        object.__setattr__(self, "c1", _frozen(_row_sums(self.A1)))
        object.__setattr__(self, "c2", _frozen(_row_sums(self.A2)))

    @classmethod
    def from_arrays(cls, name="tableau", **arrays) -> "ButcherTableau":
        raw = dict(arrays)
        raw["name"] = name
        return validate(raw)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "s": self.s}
        for key in VECTOR_KEYS:
            out[key] = [float(v) for v in getattr(self, key)]
        for key in MATRIX_KEYS:
            out[key] = [[float(v) for v in row] for row in getattr(self, key)]
        return out

    def replace(self, name=None, **arrays) -> "ButcherTableau":
        raw = self.to_dict()
        raw.update({k: np.asarray(v).tolist() for k, v in arrays.items()})
        if name is not None:
            raw["name"] = name
        return validate(raw)

    def max_abs_difference(self, other: "ButcherTableau") -> float:
        if self.s != other.s:
            return math.inf
        return max(
            float(np.max(np.abs(getattr(self, k) - getattr(other, k))))
            for k in VECTOR_KEYS + MATRIX_KEYS
        )

    def __repr__(self):
        return f"ButcherTableau(name={self.name!r}, s={self.s})"


# -- numeric literals ---------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
        and not node.keywords
    ):
        return math.sqrt(_eval_node(node.args[0]))
    raise ValueError("unsupported expression element: " + ast.dump(node))


def parse_number(value) -> float:
    """Turn a JSON literal or an expression string into a float."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return _eval_node(ast.parse(value.strip(), mode="eval"))
    raise ValueError(f"cannot interpret {value!r} as a number")


# -- validation ---------------------------------------------------------------


def find_violations(raw: Mapping[str, Any]) -> tuple[list[TableauError], dict]:
    """Check raw tableau data; returns (violations, parsed arrays)."""
    problems: list[TableauError] = []
    parsed: dict[str, np.ndarray] = {}

    s = raw.get("s")
    if s is None and "alpha" in raw:
        s = len(raw["alpha"])
    if not isinstance(s, int) or isinstance(s, bool) or s < 1:
        return [DimensionMismatch(f"stage count s must be a positive integer, got {s!r}")], parsed

    for key in VECTOR_KEYS + MATRIX_KEYS:
        if key not in raw:
            if key == "alpha":
                problems.append(DimensionMismatch("missing weight vector 'alpha'"))
                continue
            parsed[key] = np.zeros(s) if key in VECTOR_KEYS else np.zeros((s, s))
            continue
        try:
            if key in VECTOR_KEYS:
                arr = np.array([parse_number(v) for v in raw[key]], dtype=np.float64)
            else:
                arr = np.array(
                    [[parse_number(v) for v in row] for row in raw[key]], dtype=np.float64
                )
        except (TypeError, ValueError, SyntaxError, OverflowError, ZeroDivisionError) as exc:
            problems.append(NonFiniteEntry(f"{key}: {exc}"))
            continue
        want = (s,) if key in VECTOR_KEYS else (s, s)
        if arr.shape != want:
            problems.append(DimensionMismatch(f"{key} has shape {arr.shape}, expected {want}"))
            continue
        if not np.all(np.isfinite(arr)):
            bad = tuple(int(i) + 1 for i in np.argwhere(~np.isfinite(arr))[0])
            problems.append(NonFiniteEntry(f"{key}{list(bad)} is not finite"))
            continue
        parsed[key] = arr

    for key in EXPLICIT_KEYS:
        mat = parsed.get(key)
        if mat is None:
            continue
        for i in range(s):
            for j in range(i, s):
                if mat[i, j] != 0.0:
                    problems.append(ExplicitnessViolation(key, i, j, float(mat[i, j])))
    return problems, parsed


def validate(raw: Mapping[str, Any]) -> ButcherTableau:
    """Validate raw tableau data and build a :class:`ButcherTableau`.

    Missing beta vectors and matrices default to zeros.  All problems are
    collected; a single one is raised as-is, several as
    :class:`TableauViolations`.
    """
    problems, parsed = find_violations(raw)
    if len(problems) == 1:
        raise problems[0]
    if problems:
        raise TableauViolations(problems)
    return ButcherTableau(s=int(len(parsed["alpha"])), name=str(raw.get("name", "tableau")), **parsed)


def load(path) -> ButcherTableau:
    with open(path, encoding="utf-8") as fh:
        return validate(json.load(fh))


def dumps(tableau: ButcherTableau) -> str:
    return json.dumps(tableau.to_dict(), indent=2) + "\n"


def dump(tableau: ButcherTableau, path) -> None:
    Path(path).write_text(dumps(tableau), encoding="utf-8")


# -- execution plan -----------------------------------------------------------


def _representatives(keys) -> tuple[int, ...]:
    seen: dict[Any, int] = {}
    reps = []
    for i, key in enumerate(keys):
        reps.append(seen.setdefault(key, i))
    return tuple(reps)


def _row_key(*rows) -> tuple:
    return tuple(tuple(float(v) for v in row) for row in rows)


@dataclass(frozen=True, eq=False)
class ExecutionPlan:
    """Structural evaluation schedule for a tableau.

    ``drift_rep[i]`` / ``diff_rep[i]`` give the first stage index whose
    coefficient rows coincide with stage ``i`` (same node, same value), so
    only representatives are evaluated.  ``hat_rep_single`` and
    ``hat_rep_multi`` map each hat stage to ``-1`` (the point coincides with
    the first diffusion stage, i.e. ``Y_n`` at node 0) or to its
    representative hat stage.  With one Wiener process the ``B2`` sum in the
    hat stages is empty, hence the separate layout.
    """

    tableau: ButcherTableau
    hatH_trivial: tuple[bool, ...]
    A2_zero: bool
    drift_rep: tuple[int, ...]
    diff_rep: tuple[int, ...]
    hat_rep_single: tuple[int, ...]
    hat_rep_multi: tuple[int, ...]

    def hat_rep(self, m: int) -> tuple[int, ...]:
        return self.hat_rep_single if m == 1 else self.hat_rep_multi

    def evaluations_per_step(self, m: int) -> dict[str, int]:
        """Drift and per-column diffusion evaluations in one step."""
        n_drift = len(set(self.drift_rep))
        n_diff = len(set(self.diff_rep))
        n_hat = len({r for r in self.hat_rep(m) if r >= 0})
        return {"drift_evals": n_drift, "diffusion_evals": m * (n_diff + n_hat)}


def compile_plan(tableau: ButcherTableau) -> ExecutionPlan:
    t = tableau
    s = t.s
    trivial = tuple(
        bool(np.all(t.A2[i] == 0.0) and np.all(t.B2[i] == 0.0)) for i in range(s)
    )

    def hat_reps(keys, zero_flags):
        reps = list(_representatives(keys))
        return tuple(-1 if zero_flags[i] else reps[i] for i in range(s))

    multi_keys = [_row_key(t.A2[i], t.B2[i]) for i in range(s)]
    single_keys = [_row_key(t.A2[i]) for i in range(s)]
    single_zero = [bool(np.all(t.A2[i] == 0.0)) for i in range(s)]
    return ExecutionPlan(
        tableau=t,
        hatH_trivial=trivial,
        A2_zero=bool(np.all(t.A2 == 0.0)),
        drift_rep=_representatives(_row_key(t.A0[i], t.B0[i]) for i in range(s)),
        diff_rep=_representatives(_row_key(t.A1[i], t.B1[i]) for i in range(s)),
        hat_rep_single=hat_reps(single_keys, single_zero),
        hat_rep_multi=hat_reps(multi_keys, trivial),
    )
