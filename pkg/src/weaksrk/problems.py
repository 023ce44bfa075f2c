"""Benchmark SDEs with closed-form expectations of a functional."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .integrator import SdeProblem


@dataclass(frozen=True)
class BenchmarkProblem:
    sde: SdeProblem
    f: Callable[[np.ndarray], np.ndarray]
    exact_expectation: Callable[[float], float]
    t_end: float
    f_description: str

    @property
    def name(self) -> str:
        return self.sde.name


def _poly_sinh(z):
    return z**3 - 6.0 * z**2 + 8.0 * z


def problem_sinh() -> BenchmarkProblem:
    """Scalar nonlinear SDE with solution sinh(t + W(t)); f(x) = p(arsinh x)."""

    def drift(t, x):
        return 0.5 * x + np.sqrt(x * x + 1.0)

    def diffusion_col(j, t, x):
        return np.sqrt(x * x + 1.0)

    def f(x):
        return _poly_sinh(np.arcsinh(x[..., 0]))

    sde = SdeProblem(1, 1, 0.0, np.array([0.0]), drift, diffusion_col, name="sinh")
    return BenchmarkProblem(
        sde, f, lambda t: t**3 - 3.0 * t**2 + 2.0 * t, 2.0, "p(arsinh x), p(z) = z^3 - 6z^2 + 8z"
    )


_R2 = math.sqrt(2.0)
NONCOMM_DRIFT = np.array([[-273.0 / 512.0, 0.0], [-1.0 / 160.0, -785.0 / 512.0 + _R2 / 8.0]])


def problem_2d_noncommutative() -> BenchmarkProblem:
    """Linear 2-d SDE with noncommutative noise from two Wiener processes."""

    def drift(t, x):
        return x @ NONCOMM_DRIFT.T

    def diffusion_col(j, t, x):
        x1, x2 = x[..., 0], x[..., 1]
        if j == 0:
            return np.stack((x1 / 4.0, (1.0 - 2.0 * _R2) / 4.0 * x2), axis=-1)
        return np.stack((x1 / 16.0, x1 / 10.0 + x2 / 16.0), axis=-1)

    def f(x):
        return x[..., 0] ** 2

    sde = SdeProblem(2, 2, 0.0, np.array([1.0, 1.0]), drift, diffusion_col, name="noncomm2d")
    return BenchmarkProblem(sde, f, lambda t: math.exp(-t), 10.0, "(x^1)^2")


WIENER10_SIGMA = (1 / 10, 1 / 15, 1 / 20, 1 / 25, 1 / 40, 1 / 25, 1 / 20, 1 / 15, 1 / 20, 1 / 25)
WIENER10_KAPPA = (1 / 2, 1 / 4, 1 / 5, 1 / 10, 1 / 20, 1 / 2, 1 / 4, 1 / 5, 1 / 10, 1 / 20)

# (numerator, denominator) pairs of the fourth-moment formula
_W10_CONST = (4625768169, 73570420483600)
_W10_COEF1 = (-2998776077847, 113706563209000)
_W10_RATE1 = (731453, 360000)
_W10_COEF2 = (80235120932849, 78178246418000)
_W10_RATE2 = (251453, 60000)


def _q(pair) -> float:
    return pair[0] / pair[1]


def wiener10_fourth_moment(t: float) -> float:
    return (
        _q(_W10_CONST)
        + _q(_W10_COEF1) * math.exp(_q(_W10_RATE1) * t)
        + _q(_W10_COEF2) * math.exp(_q(_W10_RATE2) * t)
    )


def _wiener10_linear_moment(t: float) -> float:
    # moment ODE for diffusion sigma_j sqrt(x + kappa_j); state (1, m1, .., m4)
    S = sum(s * s for s in WIENER10_SIGMA)
    K = sum(s * s * k for s, k in zip(WIENER10_SIGMA, WIENER10_KAPPA))
    A = np.zeros((5, 5))
    for q in range(1, 5):
        A[q, q] = q
        if q >= 2:
            c = q * (q - 1) / 2
            A[q, q - 1] = c * S
            A[q, q - 2] = c * K
    return float((expm(A * t) @ np.ones(5))[4])


WIENER10_DIFFUSIONS = ("squared", "linear")


def problem_10_wiener(diffusion: str = "squared") -> BenchmarkProblem:
    """Scalar SDE dX = X dt + sum_j sigma_j sqrt(g_j(X)) dW_j with f(x) = x^4.

    ``diffusion="squared"`` uses g_j(x) = x^2 + kappa_j, for which
    :func:`wiener10_fourth_moment` is the exact fourth moment.
    ``"linear"`` uses g_j(x) = x + kappa_j; its moment is computed from the
    (triangular) moment equations.
    """
    if diffusion == "squared":

        def diffusion_col(j, t, x):
            return WIENER10_SIGMA[j] * np.sqrt(x * x + WIENER10_KAPPA[j])

        exact = wiener10_fourth_moment
    elif diffusion == "linear":

        def diffusion_col(j, t, x):
            return WIENER10_SIGMA[j] * np.sqrt(x + WIENER10_KAPPA[j])

        exact = _wiener10_linear_moment
    else:
        raise ValueError(f"diffusion must be one of {WIENER10_DIFFUSIONS}")

    def drift(t, x):
        return x

    def f(x):
        return x[..., 0] ** 4

    name = "wiener10" if diffusion == "squared" else "wiener10lin"
    sde = SdeProblem(1, 10, 0.0, np.array([1.0]), drift, diffusion_col, name=name)
    return BenchmarkProblem(sde, f, exact, 1.0, "x^4")


def gbm_moment(a: float, b: float, x0: float, q: int, t: float) -> float:
    return x0**q * math.exp((q * a + 0.5 * q * (q - 1) * b * b) * t)


def problem_gbm(a: float = 0.5, b: float = 0.3, x0: float = 1.0, q: int = 2, t_end: float = 1.0):
    """Geometric Brownian motion with f(x) = x^q (q = 2 by default)."""

    def drift(t, x):
        return a * x

    def diffusion_col(j, t, x):
        return b * x

    def f(x):
        return x[..., 0] ** q

    sde = SdeProblem(1, 1, 0.0, np.array([x0]), drift, diffusion_col, name="gbm")
    return BenchmarkProblem(sde, f, lambda t: gbm_moment(a, b, x0, q, t), t_end, f"x^{q}")


PROBLEMS = {
    "sinh": problem_sinh,
    "noncomm2d": problem_2d_noncommutative,
    "wiener10": problem_10_wiener,
    "wiener10lin": lambda: problem_10_wiener("linear"),
    "gbm": problem_gbm,
}


def get_problem(name: str) -> BenchmarkProblem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None
