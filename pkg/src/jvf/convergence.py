"""A-priori truncation-error radii and enclosure verification.

After N explicit levels, every possible value of the infinite fraction
lies in a ball whose radius has the closed form

    rho_N(Z)^2 = (beta_{N-1} ... beta_1)^2 / (2 y . P_N(Z))^2,

computed here in the log domain on top of the scaled polynomial
recurrence.  Successive balls are nested, so rho_N also bounds the
distance between any two truncations deeper than N.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polynomials
from .errors import DegeneratePolynomialError, OnBoundaryError
from .fraction import eval_truncated, eval_truncated_batch
from .geometry import INFINITY, y_component

LOG10_2 = math.log10(2.0)


@dataclass(frozen=True)
class ErrorBall:
    """Radius (as log10) of the ball of possible values after N levels."""

    log10_radius: float
    N: int
    z_y: float

    @property
    def radius(self) -> float:
        return 10.0 ** self.log10_radius


def error_radius_sequence(space, params, Z, N: int) -> np.ndarray:
    """log10 rho_n for n = 1..N in one recurrence pass (entry 0 is NaN).

    Levels where the embedding component of P_n vanishes get +inf (the
    bound is void there); callers needing a hard error use error_radius.
    """
    Z = np.asarray(Z, dtype=float)
    if y_component(space, Z) == 0.0:
        raise OnBoundaryError("error radius diverges on the boundary hyperplane")
    out = np.full(N + 1, np.nan)
    state = polynomials.init_state(space)
    beta_sum = 0.0
    for k in range(N):
        if k >= 1:
            beta_sum += math.log10(params.scale(k))
        state = polynomials.step_first_kind(state, space, Z,
                                            params.shift(k), params.scale(k))
        yP = float(state.P_cur[space.y_index])
        if yP == 0.0:
            out[k + 1] = math.inf
        else:
            out[k + 1] = beta_sum - (LOG10_2 + math.log10(abs(yP))
                                     + state.vector_exp)
    return out


def error_radius(space, params, Z, N: int) -> ErrorBall:
    """The ball radius after N levels; raises where the formula degenerates."""
    if N < 1:
        raise ValueError("N must be at least 1")
    seq = error_radius_sequence(space, params, Z, N)
    val = seq[N]
    if not math.isfinite(val):
        raise DegeneratePolynomialError(
            "embedding component of the vector polynomial vanished"
        )
    return ErrorBall(float(val), N, y_component(space, Z))


def error_radius_from_polynomials(space, params, Z, N: int) -> float:
    """log10 rho_N via the two-kind polynomial expression (test oracle).

    Uses rho_N^2 = p_{N-1} q_{N-2} |P_N/p_{N-1} - Q_{N-1}/q_{N-2}|^2
    / (2 y . P_N)^2 with the difference evaluated through the stable
    bracket chain; the N = 1 case reduces to 1/(2 |y . P_1|).
    """
    Z = np.asarray(Z, dtype=float)
    if y_component(space, Z) == 0.0:
        raise OnBoundaryError("error radius diverges on the boundary hyperplane")
    p_states = polynomials._sequence(space, params, Z, N, offset=0)
    yP = float(p_states[N].P_cur[space.y_index])
    if yP == 0.0:
        raise DegeneratePolynomialError(
            "embedding component of the vector polynomial vanished"
        )
    denom_log = LOG10_2 + math.log10(abs(yP)) + p_states[N].vector_exp
    if N == 1:
        return -denom_log
    q_states = polynomials._sequence(space, params, Z, N - 2, offset=1)
    brackets = polynomials._bracket_chain(space, params, Z, N - 1)
    mag = float(np.linalg.norm(brackets[N - 1]))
    if mag == 0.0 or p_states[N - 1].p_cur == 0.0 or q_states[N - 2].p_cur == 0.0:
        raise DegeneratePolynomialError("degenerate polynomial pair")
    num_log = (0.5 * (p_states[N - 1].log10_p + q_states[N - 2].log10_p)
               + math.log10(params.scale(N - 1)) + math.log10(mag))
    return num_log - denom_log


@dataclass(frozen=True)
class EnclosureReport:
    max_pairwise_dist: float
    bound_2rho: float
    nested: bool


def _max_pairwise(A, B=None, chunk: int = 1024) -> float:
    """Largest Euclidean distance between rows of A and B (or within A)."""
    B = A if B is None else B
    a2 = np.einsum("ij,ij->i", A, A)
    b2 = np.einsum("ij,ij->i", B, B)
    best = 0.0
    for lo in range(0, len(A), chunk):
        hi = min(lo + chunk, len(A))
        block = (a2[lo:hi, None] + b2[None, :]
                 - 2.0 * (A[lo:hi] @ B.T))
        m = float(block.max())
        if m > best:
            best = m
    return math.sqrt(max(best, 0.0))


def sample_tails(space, Z, count: int, rng) -> np.ndarray:
    """Random tails in the closed half-space opposite Z.

    Random directions with the embedding component's sign forced and
    log-uniform magnitudes 1e-3..1e3.  A fifth of the samples sit exactly
    on the boundary hyperplane: their images land on the sphere of
    possible values, which is where the pairwise supremum is attained.
    """
    zy = y_component(space, Z)
    dirs = rng.standard_normal((count, space.dim))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0.0] = 1.0
    dirs /= norms[:, None]
    yi = space.y_index
    dirs[:, yi] = -np.sign(zy) * np.abs(dirs[:, yi])
    n_boundary = count // 5
    if n_boundary:
        dirs[:n_boundary, yi] = 0.0
    mags = 10.0 ** rng.uniform(-3.0, 3.0, size=count)
    return dirs * mags[:, None]


def _sweep_diameter(points: np.ndarray) -> float:
    """Attained diameter of a point cloud by alternating farthest sweeps."""
    c = 0.5 * (points.min(axis=0) + points.max(axis=0))
    best = 0.0
    starts = [points[int(np.argmax(np.einsum("ij,ij->i", points - c, points - c)))]]
    for k in range(points.shape[1]):
        starts.append(points[int(np.argmin(points[:, k]))])
        starts.append(points[int(np.argmax(points[:, k]))])
    for p in starts:
        for _ in range(6):
            d2 = np.einsum("ij,ij->i", points - p, points - p)
            idx = int(np.argmax(d2))
            d = math.sqrt(float(d2[idx]))
            if d <= best * (1.0 + 1e-15):
                break
            best = d
            p = points[idx]
    return best


def _sphere_center(points: np.ndarray, radius: float | None = None):
    """Center of the sphere through (nearly) cospherical points.

    Radical-plane least squares: 2 (q_j - q_0) . c = |q_j|^2 - |q_0|^2,
    then, when the radius is known, Gauss-Newton steps on |q - c| - r to
    undo the conditioning loss of the linear solve.  Returns None when the
    points do not pin the center down.
    """
    if len(points) < points.shape[1] + 1:
        return None
    q0 = points[0]
    A = 2.0 * (points[1:] - q0)
    b = np.einsum("ij,ij->i", points[1:], points[1:]) - float(q0 @ q0)
    c, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
    if rank < points.shape[1]:
        return None
    if radius is not None:
        for _ in range(3):
            diff = points - c
            dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            good = dist > 0.0
            if good.sum() < points.shape[1] + 1:
                break
            J = -diff[good] / dist[good, None]
            f = dist[good] - radius
            try:
                step, *_ = np.linalg.lstsq(J, -f, rcond=None)
            except np.linalg.LinAlgError:
                break
            c = c + step
            if float(np.linalg.norm(step)) <= 1e-15 * radius:
                break
    return c


def _pullback_tail(space, params, Z, target, N: int):
    """The tail whose N-level image is ``target`` (inverse level maps)."""
    from .geometry import invert

    s = invert(space, target)
    if s is INFINITY:
        return None
    s = Z - params.shift(0) - s
    for k in range(1, N):
        inner = invert(space, s / params.scale(k))
        if inner is INFINITY:
            return None
        s = Z - params.shift(k) - inner
    return s


def enclosure_check(space, params, Z, N: int, num_tail_samples: int,
                    rng=None) -> EnclosureReport:
    """Sample allowed tails and verify the nested-ball picture empirically.

    The level-N images of boundary tails (including T = 0 and the point at
    infinity) are cospherical, which recovers the ball's center; soundness
    of the diameter bound is then certified by the O(n) test
    |image - center| <= rho_N for every sample, and the reported maximum
    pairwise distance is the diameter attained by farthest-point sweeps.
    Random tails alone can miss the sphere's far pole (its preimage may be
    a tiny patch of the boundary hyperplane), so antipodal witness tails
    are also constructed by pulling sphere points back through the inverse
    level maps.  If the center cannot be pinned down the check falls back
    to exact pairwise distances.  Nesting holds when the one-level-deeper
    images stay inside the level-N ball and the radius does not grow.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    Z = np.asarray(Z, dtype=float)
    if y_component(space, Z) == 0.0:
        raise OnBoundaryError("enclosure is defined off the boundary hyperplane")
    tails = sample_tails(space, Z, num_tail_samples, rng)
    n_boundary = num_tail_samples // 5
    tails = np.vstack([tails, np.zeros(space.dim)])

    def images(depth):
        vals, infmask = eval_truncated_batch(space, params, Z, depth, tails)
        extra = eval_truncated(space, params, Z, depth, INFINITY)
        rows = [vals[~infmask]]
        if extra is not INFINITY:
            rows.append(extra[None, :])
        return np.vstack(rows), vals[:max(n_boundary, space.dim + 4)]

    img_n, surf_n = images(N)
    img_n1, surf_n1 = images(N + 1)
    rho_n = error_radius(space, params, Z, N)
    rho_n1 = error_radius(space, params, Z, N + 1)
    bound = 2.0 * rho_n.radius
    bound1 = 2.0 * rho_n1.radius
    slack = 1.0 + 1e-9

    center = _sphere_center(surf_n, rho_n.radius)
    if center is not None:
        # antipodal witness tails: legal boundary tails hitting sphere poles
        witnesses = []
        dirs = np.vstack([np.eye(space.dim), rng.standard_normal((3, space.dim))])
        for e in dirs:
            norm = float(np.linalg.norm(e))
            if norm == 0.0:
                continue
            for sign in (1.0, -1.0):
                target = center + sign * rho_n.radius * (e / norm)
                tail = _pullback_tail(space, params, Z, target, N)
                if tail is not None:
                    witnesses.append(tail)
        if witnesses:
            w_vals, w_inf = eval_truncated_batch(space, params, Z, N,
                                                 np.asarray(witnesses))
            img_n = np.vstack([img_n, w_vals[~w_inf]])
    max_pairwise = _sweep_diameter(img_n)
    if center is not None:
        r_all = math.sqrt(float(np.max(
            np.einsum("ij,ij->i", img_n - center, img_n - center))))
        if r_all > rho_n.radius * slack:
            center = None  # certificate failed; fall back to exact distances
    if center is None:
        max_pairwise = max(max_pairwise, _max_pairwise(img_n))

    center1 = _sphere_center(surf_n1, rho_n1.radius)
    if center is not None and center1 is not None:
        inside = math.sqrt(float(np.max(
            np.einsum("ij,ij->i", img_n1 - center, img_n1 - center)))) \
            <= rho_n.radius * slack
        tight1 = math.sqrt(float(np.max(
            np.einsum("ij,ij->i", img_n1 - center1, img_n1 - center1)))) \
            <= rho_n1.radius * slack
    else:
        inside = _max_pairwise(img_n1, img_n) <= bound * slack
        tight1 = _max_pairwise(img_n1) <= bound1 * slack
    nested = (inside and tight1
              and rho_n1.log10_radius <= rho_n.log10_radius + 1e-12)
    return EnclosureReport(max_pairwise, bound, nested)
