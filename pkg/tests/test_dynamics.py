import cmath
import math

import numpy as np
import pytest

import jvf
from jvf import INFINITY, JvfParams, SignatureSpace, threefold_params
from jvf import dynamics as dyn, fraction
from jvf.errors import NoAttractiveFixedPointError
from jvf.geometry import invert


CONST = JvfParams(np.zeros((1, 3)), [0.25], period=1)


def infinity_candidate_roots(a=0.4, beta=0.25):
    """Closed form for the two in-plane roots of (z - a0) conj(z - a1) = beta."""
    a0 = a
    a1 = a * cmath.exp(2j * math.pi / 3.0)
    c = a1 - a0
    r_plus = (-abs(c) + math.sqrt(abs(c) ** 2 + 4.0 * beta)) / 2.0
    r_minus = (abs(c) + math.sqrt(abs(c) ** 2 + 4.0 * beta)) / 2.0
    return sorted([a1 + r_plus * c / abs(c), a1 - r_minus * c / abs(c)],
                  key=lambda z: z.real)


def test_period_map_single_level(space3):
    Z = np.array([0.1, -0.2, 1.5])
    T = np.array([0.3, 0.4, -0.6])
    got = dyn.period_map(space3, CONST, Z, T)
    want = 0.25 * invert(space3, Z - T)
    assert np.array_equal(got, want)


def test_period_map_iterates_are_deep_truncations(space3):
    params = threefold_params()
    Z = np.array([-0.26, 0.69, 0.001])
    T = np.zeros(3)
    for k in range(1, 8):
        T = dyn.period_map(space3, params, Z, T)
        want = params.scale(3) * fraction.eval_truncated(space3, params, Z, 3 * k)
        assert np.allclose(T, want, rtol=1e-14, atol=0.0)


def test_period_map_inverse_roundtrip(space3):
    params = threefold_params()
    rng = np.random.default_rng(50)
    Z = np.array([-0.26, 0.69, 0.3])
    for _ in range(30):
        T = rng.uniform(-1.5, 1.5, 3)
        S = dyn.period_map(space3, params, Z, T)
        back = dyn.period_map_inverse(space3, params, Z, S)
        assert np.allclose(back, T, rtol=1e-10, atol=1e-12)


def test_fixed_points_single_level_quadratic(space3):
    # t (u - t) = beta at u = 2i: roots i (2 +/- sqrt 5) / 2 on the axis
    reports = dyn.find_fixed_points(space3, CONST, [0.0, 0.0, 2.0])
    assert len(reports) == 2
    att = [r for r in reports if r.kind == dyn.ATTRACTIVE]
    rep = [r for r in reports if r.kind == dyn.REPULSIVE]
    assert len(att) == 1 and len(rep) == 1
    s5 = math.sqrt(5.0)
    assert np.allclose(att[0].location, [0, 0, (2 - s5) / 2], atol=1e-9)
    assert np.allclose(rep[0].location, [0, 0, (2 + s5) / 2], atol=1e-9)
    assert np.isclose(att[0].multiplier, (s5 - 2) ** 2, rtol=1e-6)
    assert np.isclose(rep[0].multiplier, (s5 + 2) ** 2, rtol=1e-6)


def test_attractive_point_is_the_fraction_value(space3):
    params = threefold_params()
    Z = np.array([-0.26, 0.69, 0.4])
    reports = dyn.find_fixed_points(space3, params, Z)
    att = [r for r in reports if r.kind == dyn.ATTRACTIVE]
    assert len(att) == 1
    value = params.scale(3) * fraction.eval_converged(
        space3, params, Z, rel_tol=1e-12).value
    assert np.linalg.norm(np.asarray(att[0].location) - value) \
        <= 1e-10 * (1.0 + np.linalg.norm(value))
    # and it satisfies the fixed-point identity
    V = np.asarray(att[0].location)
    resid = np.linalg.norm(dyn.period_map(space3, params, Z, V) - V)
    assert resid <= 1e-9 * (1.0 + np.linalg.norm(V))


def test_oscillatory_point_has_no_attractive_fixed_point(space3):
    params = threefold_params()
    with pytest.raises(NoAttractiveFixedPointError):
        dyn.find_fixed_points(space3, params, np.zeros(3), multi_starts=0)


def test_infinity_candidates_match_closed_form(space3):
    params = threefold_params()
    cands = dyn.infinity_fixed_point_candidates(space3, params)
    assert len(cands) == 2
    want = infinity_candidate_roots()
    got = sorted(cands, key=lambda c: c.location[0])
    for cand, root in zip(got, want):
        assert abs(complex(cand.location[0], cand.location[1]) - root) <= 1e-8
        assert cand.location[2] == 0.0
    kinds = {c.kind for c in cands}
    assert kinds == {dyn.ATTRACTIVE, dyn.REPULSIVE}
    att = [c for c in cands if c.kind == dyn.ATTRACTIVE][0]
    assert att.multiplier < 1.0
    # near the attractive candidate the deep truncation blows up on-plane
    deep = fraction.eval_truncated(space3, params, att.location, 300)
    assert deep is INFINITY or np.linalg.norm(deep) > 1e3


def test_infinity_candidates_trivial_cases(space3):
    assert dyn.infinity_fixed_point_candidates(space3, CONST) == []
    # p = 2: the only candidate is Z = A_0
    params2 = JvfParams([[0.4, 0.0, 0.0], [-0.4, 0.0, 0.0]],
                        [0.25, 0.25], period=2)
    cands = dyn.infinity_fixed_point_candidates(space3, params2)
    assert len(cands) == 1
    assert np.allclose(cands[0].location, [0.4, 0.0, 0.0], atol=1e-9)


def test_planar_reduce_single_level_closed_form(space3):
    # one level squared: [[-b, b z], [-conj z, |z|^2 - b]]
    z = complex(0.3, -0.8)
    M = dyn.planar_reduce(space3, CONST, z)
    assert not M.conjugating
    b = 0.25
    assert np.allclose(
        [M.a, M.b, M.c, M.d],
        [-b, b * z, -z.conjugate(), abs(z) ** 2 - b], rtol=1e-14)


def test_conjugation_parity_flips_per_level(space3):
    params = threefold_params()
    mats = dyn._level_matrices(space3, params, complex(0.2, 0.1))
    total = mats[0]
    assert total.conjugating
    total = total.compose(mats[1])
    assert not total.conjugating
    total = total.compose(mats[2])
    assert total.conjugating


def test_planar_reduce_applies_like_two_periods(space3):
    params = threefold_params()
    rng = np.random.default_rng(51)
    for _ in range(50):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        t = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        M = dyn.planar_reduce(space3, params, z)
        got = M.apply(t)
        inner = dyn.eval_planar(space3, params, z, 3, t)
        if inner is INFINITY:
            continue
        outer = dyn.eval_planar(space3, params, z, 3, params.scale(3) * inner)
        want = params.scale(3) * outer
        assert abs(got - want) <= 1e-12 * max(1.0, abs(want))


def test_planar_matches_vector_arithmetic(space3):
    params = threefold_params()
    rng = np.random.default_rng(52)
    for _ in range(100):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        t = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        N = int(rng.integers(1, 40))
        pv = dyn.eval_planar(space3, params, z, N, t)
        Z = dyn.planar_decode(space3, z)
        T = dyn.planar_decode(space3, t)
        vv = fraction.eval_truncated(space3, params, Z, N, T)
        if pv is INFINITY:
            assert vv is INFINITY
            continue
        assert abs(pv - complex(vv[0], vv[1])) <= 1e-12 * max(1.0, abs(pv))
        assert vv[2] == 0.0


def test_classification_far_field_and_disk(space3):
    params = threefold_params()
    assert dyn.classify_region(space3, params, complex(100.0, 0.0)) == dyn.CONVERGENT
    assert dyn.classify_region(space3, params, 0j) == dyn.OSCILLATORY
    # constant parameters: oscillatory exactly inside |z| < 2 sqrt(beta)
    for r, want in ((0.5, dyn.OSCILLATORY), (0.99, dyn.OSCILLATORY),
                    (1.01, dyn.CONVERGENT), (3.0, dyn.CONVERGENT)):
        got = dyn.classify_region(space3, CONST, r * cmath.exp(0.7j))
        assert got == want, (r, got)


def test_boundary_loops_constant_params_circle(space3):
    loops = dyn.boundary_loops(space3, CONST, (-1.5, 1.5), 121)
    assert len(loops) == 1
    radii = np.linalg.norm(loops[0], axis=1)
    assert np.allclose(radii, 1.0, atol=1e-6)
    assert np.allclose(loops[0][0], loops[0][-1])


def test_boundary_loops_canonical(space3):
    params = threefold_params()
    loops = dyn.boundary_loops(space3, params, (-1.2, 1.2), 121)
    assert len(loops) == 4
    for loop in loops:
        assert np.allclose(loop[0], loop[-1])
        # every refined vertex sits on the parabolic set
        probe = loop[::17]
        for x1, x2 in probe:
            assert abs(dyn._discriminant_point(space3, params, x1, x2)) < 1e-6


def test_oscillation_oracle_iteration(space3):
    params = threefold_params()
    z_osc = 0j
    orbit = dyn.planar_orbit(space3, params, z_osc, 10_000)
    steps = [abs(b - a) for a, b in zip(orbit[-1000:-1], orbit[-999:])
             if a is not INFINITY and b is not INFINITY]
    assert max(steps) > 1e-6  # oscillatory orbits never become Cauchy
    z_conv = complex(1.1, 0.3)
    assert dyn.classify_region(space3, params, z_conv) == dyn.CONVERGENT
    orbit = dyn.planar_orbit(space3, params, z_conv, 2000)
    tail = [abs(b - a) for a, b in zip(orbit[-50:-1], orbit[-49:])]
    assert max(tail) < 1e-12


def test_offplane_convergence_matches_planar_classification(space3):
    params = threefold_params()
    rng = np.random.default_rng(53)
    import jvf.convergence as conv
    for _ in range(10):
        z = complex(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2))
        if dyn.classify_region(space3, params, z) != dyn.CONVERGENT:
            continue
        Z = np.array([z.real, z.imag, 1e-3])
        seq = conv.error_radius_sequence(space3, params, Z, 3000)
        assert seq[3000] < -6.0
        assert seq[3000] < seq[100]
