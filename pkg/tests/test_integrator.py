import math

import numpy as np
import pytest

from weaksrk.exceptions import GridMismatch, NonFiniteState, SupportTooLarge
from weaksrk.families import dri1, dri1_m_variant, euler
from weaksrk.integrator import (
    EvalCounters,
    SdeProblem,
    exact_one_step_expectation,
    exact_scheme_expectation,
    grid_steps,
    integrate_block,
    integrate_path,
    step,
)
from weaksrk.problems import gbm_moment, problem_2d_noncommutative, problem_10_wiener, problem_gbm
from weaksrk.rng import BlockStream, RandomStream, WeakIncrements, increments_from_uniforms, ihat_matrix
from weaksrk.tableau import compile_plan, validate


def ode(rate=1.0):
    return SdeProblem(1, 1, 0.0, [1.0], lambda t, x: rate * x, lambda j, t, x: 0.0 * x)


def reference_step(tab, problem, t, y, inc):
    """Literal transcription of the scheme for one path: no caching, no skipping."""
    s, m, h = tab.s, problem.m, inc.h
    rh = math.sqrt(h)
    y = np.asarray(y, dtype=float)
    ihat = np.asarray(inc.ihat, dtype=float)
    ikl = ihat_matrix(inc) if m > 1 else None
    a = lambda j, H: problem.drift(t + tab.c0[j] * h, H[None, :])[0]  # noqa: E731
    b = lambda k, j, H: problem.diffusion_col(k, t + tab.c1[j] * h, H[None, :])[0]  # noqa: E731
    H0 = [None] * s
    Hk = [[None] * m for _ in range(s)]
    for i in range(s):
        H = y
        for j in range(i):
            H = H + (tab.A0[i, j] * h) * a(j, H0[j])
            g = b(0, j, Hk[j][0]) * ihat[0]
            for l in range(1, m):
                g = g + b(l, j, Hk[j][l]) * ihat[l]
            H = H + tab.B0[i, j] * g
        H0[i] = H
        for k in range(m):
            H = y
            for j in range(i):
                H = H + (tab.A1[i, j] * h) * a(j, H0[j])
            for j in range(i):
                H = H + (tab.B1[i, j] * rh) * b(k, j, Hk[j][k])
            Hk[i][k] = H
    hat = [[None] * m for _ in range(s)]
    for i in range(s):
        for k in range(m):
            H = y
            for j in range(s):
                H = H + (tab.A2[i, j] * h) * a(j, H0[j])
            if m > 1:
                acc = None
                for l in range(m):
                    if l == k:
                        continue
                    mix = tab.B2[i, 0] * b(l, 0, Hk[0][l])
                    for j in range(1, s):
                        mix = mix + tab.B2[i, j] * b(l, j, Hk[j][l])
                    term = mix * (ikl[k, l] / rh)
                    acc = term if acc is None else acc + term
                H = H + acc
            hat[i][k] = problem.diffusion_col(k, t + tab.c2[i] * h, H[None, :])[0]
    out = y
    for i in range(s):
        out = out + (tab.alpha[i] * h) * a(i, H0[i])
    for i in range(s):
        for k in range(m):
            ik = ihat[k]
            w = tab.beta1[i] * ik + tab.beta2[i] * (0.5 * (ik * ik - h)) / rh
            out = out + b(k, i, Hk[i][k]) * w
            out = out + hat[i][k] * (tab.beta3[i] * ik + tab.beta4[i] * rh)
    return out


def test_euler_step():
    prob = problem_gbm(a=0.5, b=0.3)
    y = np.array([2.0])
    inc = WeakIncrements(0.1, np.array([0.2]))
    out = step(compile_plan(euler()), prob.sde, 0.0, y, inc)
    assert out[0] == pytest.approx(2.0 + 0.5 * 2.0 * 0.1 + 0.3 * 2.0 * 0.2, abs=1e-15)


def test_rk32_value():
    out = step(compile_plan(dri1()), ode(), 0.0, np.array([1.0]), WeakIncrements(0.1, np.array([0.0])))
    assert out[0] == pytest.approx(1.10516666666667, abs=1e-14)


def test_dri1_counts_m1():
    c = EvalCounters()
    integrate_path(compile_plan(dri1()), problem_gbm().sde, lambda x: x[..., 0], 1.0, 0.25, RandomStream(0, 0), c)
    assert (c.drift_evals, c.diffusion_evals, c.rv_draws) == (12, 12, 4)


@pytest.mark.parametrize("m", [2, 3, 7, 10])
def test_dri1_counts_general_m(m):
    sde = SdeProblem(1, m, 0.0, [1.0], lambda t, x: x, lambda j, t, x: 0.1 * x)
    c = EvalCounters()
    step(compile_plan(dri1()), sde, 0.0, np.ones((1, 1)), increments_from_uniforms(np.full(2 * m, 0.9), m, 0.1), c)
    assert (c.drift_evals, c.diffusion_evals) == (3, 5 * m)


def test_counts_scale_with_batch():
    sde = problem_2d_noncommutative().sde
    c = EvalCounters()
    integrate_block(compile_plan(dri1()), sde, lambda x: x[..., 0], 1.0, 0.5, BlockStream(0, 0), c, lanes=100)
    assert (c.drift_evals, c.diffusion_evals, c.rv_draws) == (600, 2000, 800)


@pytest.mark.parametrize("tabname", ["dri1", "dri1m", "random"])
@pytest.mark.parametrize("problem", ["gbm", "noncomm2d", "wiener10"])
def test_matches_reference_bitwise(tabname, problem, rng):
    if tabname == "dri1":
        tab = dri1()
    elif tabname == "dri1m":
        tab = dri1_m_variant()
    else:
        s = 3
        tab = validate(
            {
                "s": s,
                **{k: rng.normal(size=s).tolist() for k in ("alpha", "beta1", "beta2", "beta3", "beta4")},
                **{k: np.tril(rng.normal(size=(s, s)), -1).tolist() for k in ("A0", "A1", "B0", "B1")},
                **{k: rng.normal(size=(s, s)).tolist() for k in ("A2", "B2")},
            }
        )
    sde = {"gbm": problem_gbm().sde, "noncomm2d": problem_2d_noncommutative().sde, "wiener10": problem_10_wiener().sde}[problem]
    plan = compile_plan(tab)
    h = 0.05
    for p in range(5):
        stream = RandomStream(3, p)
        from weaksrk.rng import sample_increments

        inc = sample_increments(stream, sde.m, h)
        y = sde.x0 * (1.0 + 0.1 * p)
        got = step(plan, sde, 0.3, y, inc)
        want = reference_step(tab, sde, 0.3, y, inc)
        if sde.m <= 2:
            np.testing.assert_array_equal(got, want)
        else:
            np.testing.assert_allclose(got, want, rtol=1e-14, atol=0)


def test_zero_increments_keep_diagonal_terms(rng):
    tab = validate({"s": 2, "alpha": [0, 0], "beta2": [1.0, 0.0], "beta4": [0.0, 1.0]})
    sde = SdeProblem(1, 1, 0.0, [1.0], lambda t, x: x, lambda j, t, x: 2.0 + 0 * x)
    h = 0.04
    out = step(compile_plan(tab), sde, 0.0, np.array([1.0]), WeakIncrements(h, np.array([0.0])))
    # beta2 * b * (-h/2)/sqrt(h) + beta4 * b * sqrt(h)
    assert out[0] == pytest.approx(1.0 + 2.0 * (-h / 2) / math.sqrt(h) + 2.0 * math.sqrt(h), abs=1e-15)


def test_deterministic_reduction(rng):
    for _ in range(10):
        s = 3
        raw = {
            "s": s,
            **{k: rng.normal(size=s).tolist() for k in ("alpha", "beta1", "beta2", "beta3", "beta4")},
            **{k: np.tril(rng.normal(size=(s, s)), -1).tolist() for k in ("A0", "A1", "B0", "B1")},
            **{k: rng.normal(size=(s, s)).tolist() for k in ("A2", "B2")},
        }
        tab = validate(raw)
        f = lambda t, x: 1.0 + x - 0.3 * x**2 + t  # noqa: E731
        sde = SdeProblem(1, 1, 0.0, [0.4], f, lambda j, t, x: 0.0 * x)
        h, y, t = 0.1, 0.4, 0.2
        k = []
        for i in range(s):
            k.append(f(t + tab.c0[i] * h, y + h * sum(tab.A0[i, j] * k[j] for j in range(i))))
        want = y + h * sum(tab.alpha[i] * k[i] for i in range(s))
        got = step(compile_plan(tab), sde, t, np.array([y]), WeakIncrements(h, np.array([0.7])))
        assert got[0] == pytest.approx(want, abs=1e-13)


def test_global_order_three():
    plan = compile_plan(dri1())
    errs = []
    for k in range(4, 8):
        h = 2.0**-k
        y = np.array([1.0])
        for n in range(2**k):
            y = step(plan, ode(), n * h, y, WeakIncrements(h, np.array([0.0])))
        errs.append(abs(y[0] - math.e))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    assert all(7 <= r <= 9 for r in ratios), ratios


def test_one_step_oracle_euler_ode():
    sde = ode(0.5)
    val = exact_one_step_expectation(compile_plan(euler()), sde, lambda x: x[..., 0], 0.0, [2.0], 0.1)
    assert val == pytest.approx(2.0 * (1 + 0.05), abs=1e-15)


def test_one_step_defect_ratio(dri1_plan):
    g = problem_gbm()
    defects = [
        abs(exact_one_step_expectation(dri1_plan, g.sde, g.f, 0.0, [1.0], h) - gbm_moment(0.5, 0.3, 1.0, 2, h))
        for h in (0.02, 0.01, 0.005)
    ]
    ratios = [a / b for a, b in zip(defects, defects[1:])]
    assert all(6 <= r <= 10 for r in ratios), ratios


def test_one_step_oracle_vs_sampling(dri1_plan):
    g = problem_gbm()
    h = 0.25
    exact = exact_one_step_expectation(dri1_plan, g.sde, g.f, 0.0, [1.0], h)
    vals = []
    for b in range(16):
        vals.append(integrate_block(dri1_plan, g.sde, g.f, h, h, BlockStream(77, b), EvalCounters()))
    v = np.concatenate(vals)
    assert abs(v.mean() - exact) < 5 * v.std() / math.sqrt(v.size)


def test_scheme_expectation_matches_closed_form_for_euler():
    g = problem_gbm()
    h = 0.25
    val = exact_scheme_expectation(compile_plan(euler()), g.sde, g.f, 1.0, h)
    # Euler on GBM: E Y_{n+1}^2 = E Y_n^2 ((1+ah)^2 + b^2 h) with E I^2 = h
    assert val == pytest.approx(((1 + 0.5 * h) ** 2 + 0.09 * h) ** 4, rel=1e-13)
    with pytest.raises(SupportTooLarge):
        exact_scheme_expectation(compile_plan(euler()), g.sde, g.f, 1.0, 0.01)


def test_grid():
    assert grid_steps(0.0, 2.0, 0.125) == 16
    with pytest.raises(GridMismatch):
        grid_steps(0.0, 1.0, 0.3)
    with pytest.raises(GridMismatch):
        grid_steps(1.0, 1.0, 0.1)


def test_path_equals_single_step(dri1_plan):
    g = problem_gbm()
    c = EvalCounters()
    val = integrate_path(dri1_plan, g.sde, g.f, 0.5, 0.5, RandomStream(4, 9), c)
    from weaksrk.rng import sample_increments

    inc = sample_increments(RandomStream(4, 9), 1, 0.5)
    y = step(dri1_plan, g.sde, 0.0, g.sde.x0, inc)
    assert val == g.f(y[None, :])[0]
    assert integrate_path(dri1_plan, g.sde, g.f, 0.5, 0.5, RandomStream(4, 9)) == val


def test_nonfinite_state_reported(dri1_plan):
    sde = SdeProblem(1, 1, 0.0, [1.0], lambda t, x: np.where(x > 1.9, np.inf, x), lambda j, t, x: 0 * x)
    with pytest.raises(NonFiniteState) as err:
        step(dri1_plan, sde, 0.0, np.array([[1.0], [2.0]]), WeakIncrements(0.5, np.zeros((2, 1))))
    assert err.value.stage == "H0_1"
    assert err.value.path == 1
