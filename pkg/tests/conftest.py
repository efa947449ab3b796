import numpy as np
import pytest

from jvf import JvfParams, SignatureSpace


def random_space(rng, dim=None):
    """A valid mixed-signature space with the embedding axis on a -1 entry."""
    dim = int(dim if dim is not None else rng.integers(3, 7))
    signs = np.ones(dim, dtype=int)
    n_neg = int(rng.integers(1, dim))
    neg = rng.choice(dim, size=n_neg, replace=False)
    signs[neg] = -1
    y_index = int(rng.choice(neg))
    return SignatureSpace(tuple(int(s) for s in signs), y_index).check()


def random_params(rng, space, depth=None, beta_lo=0.05, beta_hi=1.0,
                  shift_mag=1.0, period=None):
    """Valid parameters with |A_n| <= shift_mag and scales in [beta_lo, beta_hi].

    ``period="auto"`` wraps the stored coefficients so arbitrarily deep
    evaluations stay defined.
    """
    K = int(depth if depth is not None else rng.integers(2, 6))
    shifts = rng.uniform(-1.0, 1.0, (K, space.dim))
    norms = np.linalg.norm(shifts, axis=1)
    big = norms > shift_mag
    if big.any():
        shifts[big] *= (shift_mag / norms[big])[:, None]
    shifts[:, space.y_index] = 0.0
    scales = rng.uniform(beta_lo, beta_hi, K)
    if period == "auto":
        period = K
    return JvfParams(shifts, scales, period=period)


def random_point(rng, space, zy_min=0.1, zy_max=1.0, box=1.0):
    """A point with embedding component bounded away from the boundary."""
    Z = rng.uniform(-box, box, space.dim)
    Z[space.y_index] = rng.choice([-1.0, 1.0]) * rng.uniform(zy_min, zy_max)
    return Z


@pytest.fixture
def space3():
    return SignatureSpace((1, 1, -1), 2).check()
