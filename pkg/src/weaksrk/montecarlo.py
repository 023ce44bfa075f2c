"""Monte Carlo estimation of weak errors and empirical convergence orders.

Paths are grouped into blocks of :data:`~weaksrk.rng.BLOCK_SIZE`; block
``b`` holds paths ``b*BLOCK_SIZE ...``.  Batch membership is decided by path
index (``batches`` contiguous, equal groups), per-block partial batch sums are
reduced in block order, so results do not depend on the thread count.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .exceptions import InsufficientPaths, NonFiniteState, TooFewPoints
from .families import euler
from .integrator import EvalCounters, grid_steps, integrate_block, step
from .problems import BenchmarkProblem
from .rng import BLOCK_SIZE, BlockStream, WeakIncrements, three_point
from .tableau import ExecutionPlan, compile_plan

log = logging.getLogger(__name__)

DEFAULT_BATCHES = 20
CONFIDENCE = 0.90
NOISE_FLOOR_SIGMAS = 3.0

CSV_COLUMNS = (
    "scheme", "problem", "h", "M", "batches", "u_Mh", "mu_hat", "sigma2_mu",
    "ci_lo", "ci_hi", "drift_evals", "diffusion_evals", "rv_draws", "effort", "wall_seconds",
)  # fmt: skip


def _num(x) -> str:
    return repr(float(x))


@dataclass
class McEstimate:
    scheme: str
    problem: str
    h: float
    M: int
    batches: int
    u_Mh: float
    mu_hat: float
    sigma2_mu: float
    ci_lo: float
    ci_hi: float
    counters: EvalCounters = field(default_factory=EvalCounters)
    wall_seconds: float = 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.sigma2_mu)

    def row(self, timing: bool = True) -> list:
        c = self.counters
        return [
            self.scheme, self.problem, _num(self.h), self.M, self.batches,
            _num(self.u_Mh), _num(self.mu_hat), _num(self.sigma2_mu),
            _num(self.ci_lo), _num(self.ci_hi),
            c.drift_evals, c.diffusion_evals, c.rv_draws, effort(c),
            f"{self.wall_seconds:.3f}" if timing else "",
        ]  # fmt: skip


@dataclass
class ConvergenceReport:
    estimates: list[McEstimate]
    slope: float
    slope_stderr: float
    points_used: list[float]


def effort(counters: EvalCounters) -> int:
    """Drift evaluations + per-column diffusion evaluations + random variables."""
    return counters.drift_evals + counters.diffusion_evals + counters.rv_draws


def _check_paths(M: int, batches: int) -> int:
    if batches < 2 or M < batches:
        raise InsufficientPaths(f"need M >= batches >= 2, got M={M}, batches={batches}")
    if M % batches:
        trimmed = M - M % batches
        log.warning("M=%d not divisible by %d batches; using %d paths", M, batches, trimmed)
        M = trimmed
    return M


def _run_blocks(worker, M: int, batches: int, threads: int | None):
    """Run ``worker(block, lanes)`` over all blocks and reduce batch sums."""
    per_batch = M // batches
    nblocks = -(-M // BLOCK_SIZE)

    def job(b):
        lanes = min(BLOCK_SIZE, M - b * BLOCK_SIZE)
        counters = EvalCounters()
        try:
            values = worker(b, lanes, counters)
        except NonFiniteState as exc:
            raise NonFiniteState(exc.t, exc.stage, path=b * BLOCK_SIZE + (exc.path or 0)) from exc
        ids = (b * BLOCK_SIZE + np.arange(lanes)) // per_batch
        return np.bincount(ids, weights=values, minlength=batches), counters

    sums = np.zeros(batches)
    total = EvalCounters()
    workers = max(1, int(threads or 1))
    if workers == 1:
        results = map(job, range(nblocks))
        pool = None
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(job, range(nblocks))
    try:
        for part, counters in results:
            sums = sums + part
            total += counters
    finally:
        if pool is not None:
            pool.shutdown()
    return sums, total


def summarize(
    scheme: str, problem: BenchmarkProblem, h: float, M: int, batch_sums: np.ndarray,
    counters: EvalCounters, wall: float = 0.0,
) -> McEstimate:  # fmt: skip
    """Batch-means estimate from per-batch sums of the functional."""
    batches = len(batch_sums)
    means = batch_sums / (M // batches)
    u = math.fsum(batch_sums) / M
    exact = problem.exact_expectation(problem.t_end)
    mu = u - float(exact)
    s2 = float(np.var(means, ddof=1)) / batches
    half = float(stats.t.ppf(0.5 + CONFIDENCE / 2, batches - 1)) * math.sqrt(s2)
    return McEstimate(
        scheme, problem.name, h, M, batches, u, mu, s2, mu - half, mu + half, counters, wall
    )


def estimate(
    plan: ExecutionPlan,
    problem: BenchmarkProblem,
    h: float,
    M: int,
    seed: int,
    batches: int = DEFAULT_BATCHES,
    threads: int | None = None,
) -> McEstimate:
    """Weak error of a tableau scheme at ``problem.t_end`` from ``M`` paths."""
    M = _check_paths(M, batches)
    grid_steps(problem.sde.t0, problem.t_end, h)
    start = time.perf_counter()

    def worker(b, lanes, counters):
        stream = BlockStream(seed, b)
        return integrate_block(plan, problem.sde, problem.f, problem.t_end, h, stream, counters, lanes)

    sums, counters = _run_blocks(worker, M, batches, threads)
    return summarize(plan.tableau.name, problem, h, M, sums, counters, time.perf_counter() - start)


_EULER_PLAN = compile_plan(euler())


EXEM_LAWS = ("gaussian", "three-point")
EXEM_COUPLINGS = ("sum", "independent")


def _euler_increments(stream, m, h, lanes, law):
    if law == "gaussian":
        return stream.normals(m)[:, :lanes].T * math.sqrt(h)
    return three_point(stream.uniforms(m)[:, :lanes], h).T


def exem_block(
    problem: BenchmarkProblem, h: float, stream: BlockStream, counters: EvalCounters,
    lanes: int = BLOCK_SIZE, law: str = "gaussian", coupling: str = "sum",
) -> np.ndarray:  # fmt: skip
    """Per-path extrapolated Euler values 2 f(Z^{h/2}) - f(Z^h).

    With ``coupling="sum"`` each coarse increment is the sum of the two fine
    increments it spans; ``"independent"`` draws the coarse grid separately.
    """
    if law not in EXEM_LAWS:
        raise ValueError(f"unknown increment law {law!r}")
    if coupling not in EXEM_COUPLINGS:
        raise ValueError(f"unknown coupling {coupling!r}")
    sde = problem.sde
    N = grid_steps(sde.t0, problem.t_end, h)
    half = 0.5 * h
    m = sde.m
    fine = np.broadcast_to(sde.x0, (lanes, sde.d)).copy()
    coarse = fine.copy()
    for n in range(N):
        t = sde.t0 + n * h
        dw1 = _euler_increments(stream, m, half, lanes, law)
        dw2 = _euler_increments(stream, m, half, lanes, law)
        counters.rv_draws += 2 * m * lanes
        if coupling == "sum":
            dwc = dw1 + dw2
        else:
            dwc = _euler_increments(stream, m, h, lanes, law)
            counters.rv_draws += m * lanes
        fine = step(_EULER_PLAN, sde, t, fine, WeakIncrements(half, dw1), counters)
        fine = step(_EULER_PLAN, sde, t + half, fine, WeakIncrements(half, dw2), counters)
        coarse = step(_EULER_PLAN, sde, t, coarse, WeakIncrements(h, dwc), counters)
    return 2.0 * problem.f(fine) - problem.f(coarse)


def estimate_exem(
    problem: BenchmarkProblem,
    h: float,
    M: int,
    seed: int,
    batches: int = DEFAULT_BATCHES,
    gaussian: bool = True,
    threads: int | None = None,
    coupling: str = "sum",
    fine_step: bool = False,
) -> McEstimate:
    """EXEM estimate with coarse step ``h`` and fine step ``h/2``.

    With ``fine_step=True`` the label ``h`` is the fine step instead (coarse
    step ``2h``); the reported ``h`` is always the label.
    """
    M = _check_paths(M, batches)
    coarse = 2.0 * h if fine_step else h
    grid_steps(problem.sde.t0, problem.t_end, coarse)
    law = "gaussian" if gaussian else "three-point"
    start = time.perf_counter()

    def worker(b, lanes, counters):
        return exem_block(problem, coarse, BlockStream(seed, b), counters, lanes, law, coupling)

    sums, counters = _run_blocks(worker, M, batches, threads)
    return summarize("exem", problem, h, M, sums, counters, time.perf_counter() - start)


def regression_slope(estimates: Sequence[McEstimate], noise_sigmas: float = NOISE_FLOOR_SIGMAS):
    """OLS slope of log2|mu_hat| on log2 h over points above the noise floor."""
    used = [e for e in estimates if abs(e.mu_hat) > noise_sigmas * e.stderr]
    if len(used) < 2:
        raise TooFewPoints(f"only {len(used)} estimate(s) above the noise floor")
    x = np.log2([e.h for e in used])
    y = np.log2([abs(e.mu_hat) for e in used])
    fit = stats.linregress(x, y)
    stderr = float(fit.stderr) if len(used) > 2 else math.nan
    return float(fit.slope), stderr, [e.h for e in used]


def convergence_study(
    scheme,
    problem: BenchmarkProblem,
    hs: Sequence[float],
    M: int,
    seed: int,
    batches: int = DEFAULT_BATCHES,
    threads: int | None = None,
    exem_options: dict | None = None,
) -> ConvergenceReport:
    """Estimate the error at each step size and fit the empirical weak order.

    ``scheme`` is an :class:`ExecutionPlan` or the string ``"exem"``;
    ``exem_options`` are passed on to :func:`estimate_exem`.
    """
    exem_options = exem_options or {}
    ests = []
    for h in hs:
        if isinstance(scheme, str) and scheme == "exem":
            ests.append(estimate_exem(problem, h, M, seed, batches, threads=threads, **exem_options))
        else:
            ests.append(estimate(scheme, problem, h, M, seed, batches, threads))
    slope, err, used = regression_slope(ests)
    return ConvergenceReport(ests, slope, err, used)


def write_csv(fh, estimates, report: ConvergenceReport | None = None, comments=(), timing=True):
    for line in comments:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    cols = list(CSV_COLUMNS)
    if report is not None:
        cols += ["slope", "slope_stderr"]
    writer.writerow(cols)
    for e in estimates:
        row = e.row(timing)
        if report is not None:
            row += [_num(report.slope), _num(report.slope_stderr)]
        writer.writerow(row)


def csv_text(estimates, report=None, comments=(), timing=True) -> str:
    buf = io.StringIO()
    write_csv(buf, estimates, report, comments, timing)
    return buf.getvalue()
