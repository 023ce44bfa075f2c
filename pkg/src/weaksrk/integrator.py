"""Execution of the explicit weak SRK scheme for arbitrary tableaux.

States are arrays of shape ``(n, d)``: ``n`` independent paths advanced in
lock step (``n = 1`` for a single path, or a flat ``(d,)`` state).  Drift and
diffusion callables receive a scalar time and such a batch and must return a
batch of the same shape.

Within a step, stage values ``H0_i`` (drift) and ``Hk_i`` (diffusion, one
per Wiener component) are built for ``i = 1..s`` in order; the hat stages
follow once every ``H`` stage is done.  Drift values at ``H0_j`` and
diffusion values at ``Hk_j`` are computed once and reused everywhere.
Stages whose coefficient rows coincide share one evaluation, and hat stages
that reduce to ``Y_n`` reuse ``b^k(t, Y_n)`` from the first diffusion stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import GridMismatch, NonFiniteState, SupportTooLarge
from .rng import (
    BLOCK_SIZE,
    BlockStream,
    WeakIncrements,
    ihat_matrix,
    sample_increments,
    support_arrays,
)
from .tableau import ExecutionPlan

Drift = Callable[[float, np.ndarray], np.ndarray]
DiffusionCol = Callable[[int, float, np.ndarray], np.ndarray]
Functional = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SdeProblem:
    """Itô SDE ``dX = a(t, X) dt + sum_j b^j(t, X) dW_j`` with ``X(t0) = x0``."""

    d: int
    m: int
    t0: float
    x0: np.ndarray
    drift: Drift
    diffusion_col: DiffusionCol
    name: str = "sde"

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=np.float64).reshape(self.d)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)


@dataclass
class EvalCounters:
    drift_evals: int = 0
    diffusion_evals: int = 0
    rv_draws: int = 0

    def __iadd__(self, other: "EvalCounters"):
        self.drift_evals += other.drift_evals
        self.diffusion_evals += other.diffusion_evals
        self.rv_draws += other.rv_draws
        return self

    def __add__(self, other: "EvalCounters") -> "EvalCounters":
        out = EvalCounters(self.drift_evals, self.diffusion_evals, self.rv_draws)
        out += other
        return out

    @property
    def total(self) -> int:
        return self.drift_evals + self.diffusion_evals + self.rv_draws


@dataclass
class _StepState:
    drift: list = field(default_factory=list)
    diff: list = field(default_factory=list)
    hat: list = field(default_factory=list)


def _first_nonfinite(trace: _StepState, t: float) -> str:
    for i, val in enumerate(trace.drift):
        if val is not None and not np.all(np.isfinite(val)):
            return f"H0_{i + 1}"
    for name, group in (("H", trace.diff), ("hatH", trace.hat)):
        for i, vals in enumerate(group):
            for k, val in enumerate(vals or ()):
                if not np.all(np.isfinite(val)):
                    return f"{name}{k + 1}_{i + 1}"
    return "update"


def _bad_row(y: np.ndarray) -> int:
    return int(np.argmax(~np.all(np.isfinite(y), axis=1)))


def step(
    plan: ExecutionPlan,
    problem: SdeProblem,
    t: float,
    y: np.ndarray,
    inc: WeakIncrements,
    counters: EvalCounters | None = None,
) -> np.ndarray:
    """Advance ``y`` by one step of size ``inc.h``."""
    tab = plan.tableau
    s, m = tab.s, problem.m
    h = float(inc.h)
    if not h > 0:
        raise ValueError("step size must be positive")
    flat = np.ndim(y) == 1
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    ihat = np.atleast_2d(inc.ihat)
    n = y.shape[0]
    if ihat.shape[-1] != m or y.shape[1] != problem.d:
        raise ValueError("increment or state dimension does not match the problem")
    rh = math.sqrt(h)
    A0, A1, A2 = tab.A0, tab.A1, tab.A2
    B0, B1, B2 = tab.B0, tab.B1, tab.B2
    drift, bcol = problem.drift, problem.diffusion_col

    a_val = [None] * s
    b_val = [None] * s  # b_val[j][k] = b^k(t + c1_j h, Hk_j)
    g_val = [None] * s  # sum_l b^l(Hl_j) ihat_l
    n_drift = n_diff = 0

    for i in range(s):
        r = plan.drift_rep[i]
        if r < i:
            a_val[i] = a_val[r]
        else:
            H0 = y
            for j in range(i):
                if A0[i, j] != 0.0:
                    H0 = H0 + (A0[i, j] * h) * a_val[j]
                if B0[i, j] != 0.0:
                    H0 = H0 + B0[i, j] * g_val[j]
            a_val[i] = drift(t + tab.c0[i] * h, H0)
            n_drift += 1

        r = plan.diff_rep[i]
        if r < i:
            b_val[i] = b_val[r]
        else:
            base = y
            for j in range(i):
                if A1[i, j] != 0.0:
                    base = base + (A1[i, j] * h) * a_val[j]
            ti = t + tab.c1[i] * h
            cols = []
            for k in range(m):
                Hk = base
                for j in range(i):
                    if B1[i, j] != 0.0:
                        Hk = Hk + (B1[i, j] * rh) * b_val[j][k]
                cols.append(bcol(k, ti, Hk))
            b_val[i] = cols
            n_diff += m

        g = b_val[i][0] * ihat[:, 0:1]
        for k in range(1, m):
            g = g + b_val[i][k] * ihat[:, k : k + 1]
        g_val[i] = g

    hat_rep = plan.hat_rep(m)
    hat_val = [None] * s
    if m > 1 and any(r >= 0 for r in hat_rep):
        ikl = ihat_matrix(WeakIncrements(h, ihat, np.atleast_2d(inc.itilde)))
        idx = np.arange(m)
        ikl[:, idx, idx] = 0.0
        ikl = ikl / rh
    for i in range(s):
        r = hat_rep[i]
        if r < 0:
            hat_val[i] = b_val[0]
            continue
        if r < i:
            hat_val[i] = hat_val[r]
            continue
        base = y
        for j in range(s):
            if A2[i, j] != 0.0:
                base = base + (A2[i, j] * h) * a_val[j]
        mix = None
        if m > 1:
            for j in range(s):
                if B2[i, j] != 0.0:
                    term = B2[i, j] * np.stack(b_val[j])
                    mix = term if mix is None else mix + term
        ti = t + tab.c2[i] * h
        cols = []
        for k in range(m):
            Hk = base
            if mix is not None:
                # sum over l != k of b^l(H_j^(l)) * ihat_(k,l) / sqrt(h)
                Hk = Hk + np.einsum("nl,lnd->nd", ikl[:, k, :], mix)
            cols.append(bcol(k, ti, Hk))
        hat_val[i] = cols
        n_diff += m

    ynew = y
    for i in range(s):
        if tab.alpha[i] != 0.0:
            ynew = ynew + (tab.alpha[i] * h) * a_val[i]
    b1, b2, b3, b4 = tab.beta1, tab.beta2, tab.beta3, tab.beta4
    for i in range(s):
        for k in range(m):
            ik = ihat[:, k : k + 1]
            if b1[i] != 0.0 or b2[i] != 0.0:
                w = b1[i] * ik
                if b2[i] != 0.0:
                    w = w + b2[i] * (0.5 * (ik * ik - h)) / rh
                ynew = ynew + b_val[i][k] * w
            if b3[i] != 0.0 or b4[i] != 0.0:
                w = b3[i] * ik + b4[i] * rh
                ynew = ynew + hat_val[i][k] * w

    if counters is not None:
        counters.drift_evals += n_drift * n
        counters.diffusion_evals += n_diff * n
    if not np.all(np.isfinite(ynew)):
        trace = _StepState(a_val, b_val, hat_val)
        raise NonFiniteState(t, _first_nonfinite(trace, t), path=_bad_row(ynew))
    return ynew[0] if flat else ynew


def grid_steps(t0: float, t_end: float, h: float) -> int:
    if not t_end > t0:
        raise GridMismatch("t_end must exceed the initial time")
    if not h > 0:
        raise GridMismatch("h must be positive")
    ratio = (t_end - t0) / h
    N = int(round(ratio))
    if N < 1 or abs(ratio - N) > 1e-9:
        raise GridMismatch(f"(t_end - t0)/h = {ratio!r} is not an integer")
    return N


def integrate_block(
    plan: ExecutionPlan,
    problem: SdeProblem,
    f: Functional,
    t_end: float,
    h: float,
    stream: BlockStream,
    counters: EvalCounters,
    lanes: int = BLOCK_SIZE,
) -> np.ndarray:
    """Simulate the first ``lanes`` paths of a block; returns ``f(Y_N)`` per path."""
    N = grid_steps(problem.t0, t_end, h)
    y = np.broadcast_to(problem.x0, (lanes, problem.d)).copy()
    for n in range(N):
        inc = sample_increments(stream, problem.m, h, counters, lanes=lanes)
        y = step(plan, problem, problem.t0 + n * h, y, inc, counters)
    return np.asarray(f(y), dtype=np.float64)


def integrate_path(plan, problem, f, t_end, h, stream, counters=None) -> float:
    """Single path driven by a :class:`~weaksrk.rng.RandomStream`."""
    N = grid_steps(problem.t0, t_end, h)
    y = problem.x0.copy()
    for n in range(N):
        inc = sample_increments(stream, problem.m, h, counters)
        y = step(plan, problem, problem.t0 + n * h, y, inc, counters)
    return float(np.asarray(f(y[None, :]))[0])


def exact_one_step_expectation(plan, problem, f, t, y, h) -> float:
    """Exact E f(Y_1) given Y_0 = y, by enumerating the discrete increments."""
    inc, probs = support_arrays(problem.m, h)
    ys = np.broadcast_to(np.asarray(y, dtype=np.float64), (len(probs), problem.d))
    out = step(plan, problem, t, ys, inc)
    return math.fsum(probs * np.asarray(f(out), dtype=np.float64))


def exact_scheme_expectation(plan, problem, f, t_end, h, max_outcomes: int = 2_000_000) -> float:
    """Exact E f(Y_N) of the N-step scheme by nested enumeration."""
    N = grid_steps(problem.t0, t_end, h)
    inc, probs = support_arrays(problem.m, h)
    K = len(probs)
    if K**N > max_outcomes:
        raise SupportTooLarge(f"{K}^{N} outcomes exceed {max_outcomes}")
    ys = problem.x0[None, :]
    weights = np.ones(1)
    for n in range(N):
        rep = ys.shape[0]
        ys = np.repeat(ys, K, axis=0)
        tiled = WeakIncrements(h, np.tile(inc.ihat, (rep, 1)), np.tile(inc.itilde, (rep, 1)))
        weights = np.repeat(weights, K) * np.tile(probs, rep)
        ys = step(plan, problem, problem.t0 + n * h, ys, tiled)
    return math.fsum(weights * np.asarray(f(ys), dtype=np.float64))
