import math

import numpy as np
import pytest

from weaksrk.exceptions import IndexOutOfRange, SupportTooLarge
from weaksrk.integrator import EvalCounters
from weaksrk.rng import (
    BLOCK_SIZE,
    BlockStream,
    RandomStream,
    WeakIncrements,
    enumerate_support,
    ihat_matrix,
    ihat_pair,
    sample_increments,
    support_arrays,
    three_point,
    variables_per_step,
)


def test_three_point_moments_sampled():
    stream = BlockStream(7, 0)
    x = np.concatenate([sample_increments(stream, 1, 1.0).ihat[:, 0] for _ in range(16)])
    n = x.size
    assert n == 16 * BLOCK_SIZE
    for power, exact in ((1, 0.0), (2, 1.0), (4, 3.0)):
        vals = x**power
        se = vals.std() / math.sqrt(n)
        assert abs(vals.mean() - exact) < 5 * se


def test_support_values():
    r = math.sqrt(0.75)
    vals = three_point(np.linspace(0, 0.999, 1000), 0.25)
    assert set(np.unique(vals)) == {-r, 0.0, r}


def test_threshold_mapping():
    assert three_point(np.array([0.0, 1 / 6 - 1e-12, 1 / 6, 5 / 6 - 1e-12, 5 / 6]), 3.0).tolist() == [
        -3.0, -3.0, 0.0, 0.0, 3.0,
    ]  # fmt: skip


def test_replay():
    a = sample_increments(RandomStream(5, 70000), 3, 0.5)
    b = sample_increments(RandomStream(5, 70000), 3, 0.5)
    np.testing.assert_array_equal(a.ihat, b.ihat)
    np.testing.assert_array_equal(a.itilde, b.itilde)


def test_single_path_matches_block_lane():
    block = sample_increments(BlockStream(9, 1), 2, 0.1)
    single = sample_increments(RandomStream(9, BLOCK_SIZE + 17), 2, 0.1)
    np.testing.assert_array_equal(block.ihat[17], single.ihat)
    np.testing.assert_array_equal(block.itilde[17], single.itilde)


def test_draw_counting():
    c = EvalCounters()
    sample_increments(BlockStream(1, 0), 1, 0.1, c, lanes=10)
    assert c.rv_draws == 10
    inc = sample_increments(BlockStream(1, 0), 4, 0.1, c, lanes=10)
    assert c.rv_draws == 10 + 80
    assert inc.ihat.shape == (10, 4) and inc.itilde.shape == (10, 4)
    assert variables_per_step(1) == 1 and variables_per_step(3) == 6
    assert sample_increments(BlockStream(1, 0), 1, 0.1).itilde is None


def test_ihat_pair_examples():
    h = 0.3
    inc = WeakIncrements(h, np.array([math.sqrt(3 * h), 0.0]), np.array([math.sqrt(h), -math.sqrt(h)]))
    assert ihat_pair(0, 0, inc) == pytest.approx(h, abs=1e-16)
    assert ihat_pair(1, 1, inc) == -h / 2
    with pytest.raises(IndexOutOfRange):
        ihat_pair(0, 2, inc)


def test_ihat_pair_sum_and_antisymmetry(rng):
    h = 0.2
    for _ in range(50):
        m = 4
        u = rng.random(2 * m)
        from weaksrk.rng import increments_from_uniforms

        inc = increments_from_uniforms(u, m, h)
        M = ihat_matrix(inc)
        for k in range(m):
            for l in range(m):
                assert M[k, l] == ihat_pair(k, l, inc)
                if k < l:
                    assert ihat_pair(k, l, inc) + ihat_pair(l, k, inc) == pytest.approx(
                        inc.ihat[k] * inc.ihat[l], abs=1e-15
                    )
                    diff = ihat_pair(k, l, inc) - ihat_pair(l, k, inc)
                    assert diff == pytest.approx(-math.sqrt(h) * inc.itilde[k], abs=1e-15)


def test_enumeration_m1():
    out = enumerate_support(1, 0.4)
    assert len(out) == 6
    assert math.fsum(p for _, p in out) == pytest.approx(1.0, abs=1e-14)
    marg = {}
    for inc, p in out:
        key = round(float(inc.ihat[0]), 12)
        marg[key] = marg.get(key, 0.0) + p
    r = round(math.sqrt(1.2), 12)
    assert marg == pytest.approx({-r: 1 / 6, 0.0: 2 / 3, r: 1 / 6})


def test_enumeration_m2():
    out = enumerate_support(2, 1.0)
    assert len(out) == 36
    assert math.fsum(p * ihat_pair(0, 1, inc) for inc, p in out) == pytest.approx(0.0, abs=1e-15)


def test_exact_moments():
    h = 0.7
    inc, p = support_arrays(2, h)
    x = inc.ihat[:, 0]
    assert np.dot(p, x) == pytest.approx(0, abs=1e-15)
    assert np.dot(p, x**3) == pytest.approx(0, abs=1e-15)
    assert np.dot(p, x**5) == pytest.approx(0, abs=1e-14)
    assert np.dot(p, x**2) == pytest.approx(h)
    assert np.dot(p, x**4) == pytest.approx(3 * h * h)
    assert np.dot(p, x**6) == pytest.approx(9 * h**3)
    M = ihat_matrix(inc)
    assert np.dot(p, M[:, 0, 0]) == pytest.approx(0, abs=1e-15)
    assert np.dot(p, M[:, 0, 1]) == pytest.approx(0, abs=1e-15)


def test_support_too_large():
    with pytest.raises(SupportTooLarge):
        support_arrays(7, 1.0)


MONOMIALS = [
    # exponents of (I1, I2, I12, I21, I11)
    (2, 0, 0, 0, 0), (4, 0, 0, 0, 0), (1, 1, 0, 0, 0), (2, 2, 0, 0, 0), (0, 0, 2, 0, 0),
    (0, 0, 1, 1, 0), (1, 1, 1, 0, 0), (0, 0, 0, 0, 2), (2, 0, 0, 0, 1), (0, 0, 2, 2, 0),
    (1, 0, 0, 0, 1), (0, 0, 0, 2, 0), (1, 1, 0, 1, 0), (0, 2, 0, 0, 1),
]  # fmt: skip


def _features(inc):
    M = ihat_matrix(inc)
    return np.stack([inc.ihat[..., 0], inc.ihat[..., 1], M[..., 0, 1], M[..., 1, 0], M[..., 0, 0]], axis=-1)


def test_mixed_moments_enumeration_vs_sampling():
    h = 1.0
    inc, p = support_arrays(2, h)
    F = _features(inc)
    exact = [float(np.dot(p, np.prod(F**np.array(e), axis=1))) for e in MONOMIALS]
    sums = np.zeros(len(MONOMIALS))
    sq = np.zeros(len(MONOMIALS))
    n = 0
    for b in range(153):  # about 10^7 samples
        F = _features(sample_increments(BlockStream(2024, b), 2, h))
        vals = np.stack([np.prod(F**np.array(e), axis=1) for e in MONOMIALS], axis=1)
        sums += vals.sum(axis=0)
        sq += (vals**2).sum(axis=0)
        n += vals.shape[0]
    mean = sums / n
    se = np.sqrt((sq / n - mean**2) / n)
    assert n >= 10**7
    for e, m, s, x in zip(MONOMIALS, mean, se, exact):
        assert abs(m - x) <= 5 * s + 1e-14, (e, m, x, s)
