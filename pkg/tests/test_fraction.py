import cmath
import math

import numpy as np
import pytest

import jvf
from jvf import INFINITY, JvfParams, SignatureSpace, threefold_params
from jvf import fraction
from jvf.errors import (
    DimensionMismatchError,
    NonPositiveScaleError,
    NotConvergedError,
    OnBoundaryError,
    ShiftHasYComponentError,
)
from jvf.geometry import invert, y_component

from conftest import random_params, random_point, random_space


def constant_tail_value(y0, beta):
    """Independent oracle for A = 0, constant beta, Z on the embedding axis.

    The equivalent scalar fraction at u = i*y0 has tail s solving
    s*(u - s) = beta; the convergent branch is the root with |s| < sqrt(beta)
    and the value is 1/(u - s).
    """
    u = 1j * y0
    root = cmath.sqrt(u * u - 4.0 * beta)
    s = (u - root) / 2.0
    if abs(s) > math.sqrt(beta):
        s = (u + root) / 2.0
    return 1.0 / (u - s)


def test_validate_accepts_canonical(space3):
    fraction.validate(space3, threefold_params())


def test_validate_rejects_bad_params(space3):
    with pytest.raises(NonPositiveScaleError) as err:
        fraction.validate(space3, JvfParams(np.zeros((2, 3)), [0.25, 0.0]))
    assert err.value.index == 1
    with pytest.raises(ShiftHasYComponentError) as err:
        fraction.validate(space3, JvfParams([[0.0, 0.0, 1.0]], [0.25]))
    assert err.value.index == 0
    with pytest.raises(DimensionMismatchError):
        fraction.validate(space3, JvfParams(np.zeros((1, 4)), [0.25]))


def test_period_wraparound():
    params = threefold_params()
    for n in range(12):
        assert np.array_equal(params.shift(n + 3), params.shift(n))
        assert params.scale(n + 3) == params.scale(n)
    aperiodic = JvfParams(np.zeros((4, 3)), [0.1, 0.2, 0.3, 0.4])
    with pytest.raises(IndexError):
        aperiodic.shift(4)
    with pytest.raises(ValueError):
        JvfParams(np.zeros((2, 3)), [0.25, 0.25], period=3)


def test_eval_truncated_single_level(space3):
    const = JvfParams(np.zeros((1, 3)), [0.25], period=1)
    out = fraction.eval_truncated(space3, const, [0.0, 0.0, 2.0], 1)
    assert np.array_equal(out, [0.0, 0.0, -0.5])
    # an infinite tail is mapped to zero one level up
    out = fraction.eval_truncated(space3, const, [0.3, -0.4, 2.0], 1, INFINITY)
    assert np.array_equal(out, np.zeros(3))


def test_eval_truncated_constant_coefficients_matches_scalar_oracle(space3):
    const = JvfParams(np.zeros((1, 3)), [0.25], period=1)
    for y0 in (0.5, 1.0, 2.0):
        got = fraction.eval_truncated(space3, const, [0.0, 0.0, y0], 200)
        want = constant_tail_value(y0, 0.25)
        assert abs(got[2] - want.imag) <= 1e-12
        assert abs(got[0]) == 0.0 and abs(got[1]) == 0.0


def test_tail_recursion_is_bitwise_consistent(space3):
    rng = np.random.default_rng(10)
    for _ in range(50):
        space = random_space(rng)
        params = random_params(rng, space, depth=8)
        Z = random_point(rng, space)
        T = rng.uniform(-1, 1, space.dim)
        N = int(rng.integers(1, 8))
        deeper = fraction.eval_truncated(space, params, Z, N + 1, T)
        pushed = params.scale(N) * invert(space, Z - params.shift(N) - T)
        direct = fraction.eval_truncated(space, params, Z, N, pushed)
        assert np.array_equal(deeper, direct)


def test_forward_fragment_matches_truncated_evaluation(space3):
    rng = np.random.default_rng(11)
    for _ in range(50):
        space = random_space(rng)
        params = random_params(rng, space, depth=9)
        Z = random_point(rng, space)
        N = int(rng.integers(1, 10))
        frag = fraction.forward_fragment(space, params, Z, 0, N - 1)
        ev = fraction.eval_truncated(space, params, Z, N)
        assert np.array_equal(frag, ev)


def test_fragment_conventions_and_recurrences():
    rng = np.random.default_rng(12)
    space = random_space(rng, dim=4)
    params = random_params(rng, space, depth=7)
    Z = random_point(rng, space)
    assert np.array_equal(fraction.forward_fragment(space, params, Z, 3, 1),
                          np.zeros(4))
    assert np.array_equal(fraction.reverse_fragment(space, params, Z, 1, 3),
                          np.zeros(4))
    m = 2
    assert np.allclose(fraction.forward_fragment(space, params, Z, m, m),
                       invert(space, Z - params.shift(m)), rtol=1e-15)
    for n in range(3, 7):
        lhs = fraction.forward_fragment(space, params, Z, 1, n)
        inner = fraction.forward_fragment(space, params, Z, 2, n)
        rhs = invert(space, Z - params.shift(1) - params.scale(2) * inner)
        assert np.allclose(lhs, rhs, rtol=1e-12)
    for m in range(1, 6):
        lhs = fraction.reverse_fragment(space, params, Z, m, 0)
        inner = fraction.reverse_fragment(space, params, Z, m - 1, 0)
        rhs = invert(space, Z - params.shift(m) - params.scale(m) * inner)
        assert np.allclose(lhs, rhs, rtol=1e-12)


def test_orientation_property():
    # the value's embedding component is opposite in sign to Z's
    rng = np.random.default_rng(13)
    for _ in range(300):
        space = random_space(rng)
        params = random_params(rng, space, beta_lo=1e-3, period="auto")
        Z = random_point(rng, space, zy_min=1e-3)
        zy = y_component(space, Z)
        T = rng.uniform(-1, 1, space.dim)
        T[space.y_index] = -np.sign(zy) * rng.uniform(1e-3, 2.0)
        N = int(rng.integers(1, 20))
        out = fraction.eval_truncated(space, params, Z, N, T)
        assert out is not INFINITY
        assert np.sign(y_component(space, out)) == -np.sign(zy)


def test_orientation_interchange_lemma():
    # |a u + b v| = |a v + b u| for unit u, v
    rng = np.random.default_rng(14)
    for _ in range(500):
        dim = int(rng.integers(2, 7))
        u = rng.standard_normal(dim)
        v = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        v /= np.linalg.norm(v)
        a, b = rng.uniform(-3, 3, 2)
        lhs = np.linalg.norm(a * u + b * v)
        rhs = np.linalg.norm(a * v + b * u)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


def test_eval_truncated_batch_matches_scalar(space3):
    rng = np.random.default_rng(15)
    params = threefold_params()
    Zs = rng.uniform(-1, 1, (40, 3))
    Zs[:, 2] = rng.choice([-1, 1], 40) * rng.uniform(0.01, 1, 40)
    vals, infmask = fraction.eval_truncated_batch(space3, params, Zs, 25)
    assert not infmask.any()
    for k in range(40):
        single = fraction.eval_truncated(space3, params, Zs[k], 25)
        assert np.array_equal(vals[k], single)


def test_eval_truncated_batch_tails_and_infinities(space3):
    const = JvfParams(np.zeros((1, 3)), [0.25], period=1)
    Z = np.array([0.0, 0.0, 2.0])
    tails = np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 2.0]])
    # the second tail hits Z - T = 0 at the innermost level: R_1 is infinite
    vals, infmask = fraction.eval_truncated_batch(space3, const, Z, 1, tails)
    assert not infmask[0] and infmask[1]
    single = fraction.eval_truncated(space3, const, Z, 1, tails[0])
    assert np.array_equal(vals[0], single)
    # one level deeper the infinity becomes a zero tail
    vals2, infmask2 = fraction.eval_truncated_batch(space3, const, Z, 2, tails)
    assert not infmask2.any()
    want = fraction.eval_truncated(
        space3, const, Z, 2, np.array([0.0, 0.0, 2.0]))
    assert np.allclose(vals2[1], want, rtol=1e-15)


def test_truncation_sequence_matches_direct(space3):
    params = threefold_params()
    Z = np.array([-0.26, 0.69, 0.2])
    seq = fraction.truncation_sequence(space3, params, Z, 50)
    for N in range(1, 51):
        assert np.array_equal(seq[N],
                              fraction.eval_truncated(space3, params, Z, N))
    aperiodic = JvfParams(params.shifts, params.scales)
    seq2 = fraction.truncation_sequence(space3, aperiodic, Z, 3)
    for N in range(1, 4):
        assert np.array_equal(seq2[N],
                              fraction.eval_truncated(space3, aperiodic, Z, N))


def test_eval_converged_constant_coefficient_oracle(space3):
    const = JvfParams(np.zeros((1, 3)), [0.25], period=1)
    for y0 in (0.5, 1.0, 2.0):
        res = fraction.eval_converged(space3, const, [0.0, 0.0, y0],
                                      rel_tol=1e-10)
        want = constant_tail_value(y0, 0.25)
        assert abs(res.value[2] - want.imag) <= 1e-10 * abs(want.imag)
        assert res.bound <= 1e-10 * np.linalg.norm(res.value)


def test_eval_converged_reference_point(space3):
    params = threefold_params()
    res = fraction.eval_converged(space3, params, [-0.26, 0.69, 0.001])
    assert y_component(space3, res.value) < 0.0
    assert res.bound <= 1e-10 * np.linalg.norm(res.value)


def test_eval_converged_boundary_and_cap(space3):
    params = threefold_params()
    with pytest.raises(OnBoundaryError):
        fraction.eval_converged(space3, params, [0.1, 0.2, 0.0])
    with pytest.raises(NotConvergedError) as err:
        fraction.eval_converged(space3, params, [-0.26, 0.69, 0.001],
                                rel_tol=1e-10, max_levels=8)
    assert err.value.bound > 0.0
