"""Periodic-fraction fixed points, planar reduction, and region classification.

For shifts with period p the value of the infinite fraction is the
attractive fixed point of the one-period map F(Z, T) = beta_p R_p(Z, T);
other solutions of F(Z, T) = T are repulsive and correspond to
continuations of the fraction.  When Z and the shifts lie in the plane
spanned by the two positive axes of a 3-D space, each level acts on the
tail as a Moebius transformation of the conjugated complex coordinate,
so one period composes to a (possibly conjugated) linear fractional map
whose multipliers classify the planar behaviour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoAttractiveFixedPointError
from .fraction import eval_truncated
from .geometry import INFINITY, ExtVector, SignatureSpace, invert, is_infinite

ATTRACTIVE = "attractive"
REPULSIVE = "repulsive"
INDIFFERENT = "indifferent"

_KIND_BAND = 1e-9


@dataclass(frozen=True)
class MoebiusMap:
    """t -> (a t + b)/(c t + d), acting on conj(t) when ``conjugating``."""

    a: complex
    b: complex
    c: complex
    d: complex
    conjugating: bool = False

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def apply(self, t):
        if t is INFINITY:
            if self.c == 0:
                return INFINITY
            return self.a / self.c
        t = t.conjugate() if self.conjugating else t
        den = self.c * t + self.d
        if den == 0:
            return INFINITY
        return (self.a * t + self.b) / den

    def compose(self, inner: "MoebiusMap") -> "MoebiusMap":
        """The map t -> self(inner(t))."""
        M2 = inner.matrix
        if self.conjugating:
            M2 = M2.conj()
        M = self.matrix @ M2
        return MoebiusMap(M[0, 0], M[0, 1], M[1, 0], M[1, 1],
                          self.conjugating ^ inner.conjugating)

    def fixed_points_with_multipliers(self):
        """(point, |multiplier|) pairs; the point INFINITY stands for t = inf.

        Only meaningful for non-conjugating maps.
        """
        a, b, c, d = self.a, self.b, self.c, self.d
        scale = max(abs(a), abs(b), abs(c), abs(d))
        det = self.det
        if scale == 0.0:
            raise ValueError("degenerate map")
        if abs(c) <= 1e-14 * scale:
            out = [(INFINITY, abs(d / a) if a != 0 else math.inf)]
            if a != d:
                t = b / (d - a)
                out.append((t, abs(a / d) if d != 0 else math.inf))
            return out
        disc = (d - a) ** 2 + 4.0 * b * c
        root = complex(disc) ** 0.5
        out = []
        for sgn in (1.0, -1.0):
            t = ((a - d) + sgn * root) / (2.0 * c)
            den = c * t + d
            mult = abs(det / (den * den)) if den != 0 else math.inf
            out.append((t, mult))
        return out


@dataclass(frozen=True)
class FixedPointReport:
    location: ExtVector
    multiplier: float
    kind: str


@dataclass(frozen=True)
class InfinityCandidate:
    """An in-plane Z at which the period map fixes the point at infinity."""

    location: np.ndarray
    multiplier: float
    kind: str


def _classify(multiplier: float) -> str:
    if abs(multiplier - 1.0) <= _KIND_BAND:
        return INDIFFERENT
    return ATTRACTIVE if multiplier < 1.0 else REPULSIVE


def period_map(space, params, Z, T) -> ExtVector:
    """F(Z, T) = beta_p R_p(Z, T); total on the compactified space."""
    p = params.period
    if p is None:
        raise ValueError("period_map needs periodic parameters")
    inner = eval_truncated(space, params, np.asarray(Z, dtype=float), p, T)
    if inner is INFINITY:
        return INFINITY
    return params.scale(p) * inner


def period_map_inverse(space, params, Z, S) -> ExtVector:
    """Exact inverse of the one-period map (levels unwound top-down).

    Each level g_n(V) = beta * 1/(Z - A_n - V) inverts to
    g_n^{-1}(S) = Z - A_n - 1/(S/beta); repulsive fixed points of the
    period map are attractive for this inverse, which makes them reachable
    by plain iteration.
    """
    p = params.period
    if p is None:
        raise ValueError("period_map_inverse needs periodic parameters")
    Z = np.asarray(Z, dtype=float)
    V = S
    for n in range(p):
        beta = params.scale(p) if n == 0 else params.scale(n)
        if V is INFINITY:
            inner = np.zeros(space.dim)
        else:
            inner = invert(space, V / beta)
        if inner is INFINITY:
            V = INFINITY
        else:
            V = Z - params.shift(n) - inner
    return V


def numerical_jacobian(f, x, step: float) -> np.ndarray:
    """Central-difference Jacobian of a vector map; raises if f leaves R^n."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        hi = f(x + e)
        lo = f(x - e)
        if is_infinite(hi) or is_infinite(lo):
            raise ValueError("jacobian probe hit the point at infinity")
        cols.append((np.asarray(hi) - np.asarray(lo)) / (2.0 * step))
    return np.column_stack(cols)


def _spectral_radius(J: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(J))))


def _damped_newton(G, x0, tol_scale=1e-12, max_iter=60):
    """Backtracking Newton for G(x) = 0 with a numeric Jacobian."""
    x = np.asarray(x0, dtype=float)
    for _ in range(max_iter):
        gx = G(x)
        if is_infinite(gx):
            return None
        gx = np.asarray(gx)
        gnorm = float(np.linalg.norm(gx))
        if not math.isfinite(gnorm):
            return None
        if gnorm <= tol_scale * (1.0 + float(np.linalg.norm(x))):
            return x
        try:
            J = numerical_jacobian(G, x, 1e-7 * (1.0 + float(np.linalg.norm(x))))
            step = np.linalg.solve(J, -gx)
        except (ValueError, np.linalg.LinAlgError):
            return None
        t = 1.0
        accepted = False
        while t >= 1e-4:
            xn = x + t * step
            gn = G(xn)
            if not is_infinite(gn):
                gn_norm = float(np.linalg.norm(np.asarray(gn)))
                if math.isfinite(gn_norm) and gn_norm < (1.0 - 0.25 * t) * gnorm:
                    x = xn
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            return None
    return None


def find_fixed_points(space, params, Z, multi_starts: int = 64,
                      seed: int = 0) -> list:
    """Locate and classify fixed points of the one-period map at Z.

    The attractive point comes from direct iteration (polished by a few
    Newton steps); further solutions are sought by damped Newton from
    ``multi_starts`` random seeds with log-uniform magnitudes and
    deduplicated at distance 1e-8.  Kinds follow the spectral radius of a
    central-difference Jacobian.  Exhaustiveness of the repulsive list is
    best effort only.
    """
    if params.period is None:
        raise ValueError("find_fixed_points needs periodic parameters")
    Z = np.asarray(Z, dtype=float)

    def F(T):
        return period_map(space, params, Z, T)

    def G(T):
        FT = F(T)
        if is_infinite(FT):
            return INFINITY
        return np.asarray(FT) - T

    T = np.zeros(space.dim)
    attractive = None
    for _ in range(100_000):
        T2 = F(T)
        if not is_infinite(T2) and not is_infinite(T):
            if float(np.linalg.norm(T2 - T)) <= 1e-12 * (1.0 + float(np.linalg.norm(T2))):
                attractive = np.asarray(T2)
                break
        T = T2
    if attractive is None:
        raise NoAttractiveFixedPointError("period-map iteration did not settle")
    polished = _damped_newton(G, attractive)
    if polished is not None:
        attractive = polished

    points = [attractive]
    rng = np.random.default_rng(seed)
    for _ in range(multi_starts):
        direction = rng.standard_normal(space.dim)
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            continue
        start = direction / norm * 10.0 ** rng.uniform(-2.0, 2.0)
        # warm up with the inverse map, for which repulsive points attract
        S = start
        for _ in range(300):
            S2 = period_map_inverse(space, params, Z, S)
            if not is_infinite(S2) and not is_infinite(S):
                if float(np.linalg.norm(S2 - S)) <= 1e-10 * (1.0 + float(np.linalg.norm(S2))):
                    S = S2
                    break
            S = S2
        seed_pt = start if is_infinite(S) else np.asarray(S)
        found = _damped_newton(G, seed_pt)
        if found is None:
            found = _damped_newton(G, start)
        if found is None:
            continue
        if all(float(np.linalg.norm(found - q)) > 1e-8 for q in points):
            points.append(found)

    reports = []
    for T_star in points:
        h = 1e-7 * (1.0 + float(np.linalg.norm(T_star)))
        try:
            mult = _spectral_radius(numerical_jacobian(F, T_star, h))
        except ValueError:
            continue
        reports.append(FixedPointReport(T_star, mult, _classify(mult)))
    reports.sort(key=lambda r: (r.multiplier, tuple(np.asarray(r.location))))
    return reports


# -- planar (in-plane) machinery --------------------------------------------

def _plane_axes(space: SignatureSpace):
    axes = [i for i in range(space.dim) if i != space.y_index]
    if space.dim != 3 or len(axes) != 2:
        raise ValueError("planar reduction needs a 3-D space")
    if space.signs[axes[0]] != 1 or space.signs[axes[1]] != 1:
        raise ValueError("planar axes must carry positive signature")
    return axes


def planar_encode(space, Z) -> complex:
    """In-plane vector -> complex number on the two positive axes."""
    i, j = _plane_axes(space)
    Z = np.asarray(Z, dtype=float)
    return complex(Z[i], Z[j])


def planar_decode(space, z: complex) -> np.ndarray:
    i, j = _plane_axes(space)
    out = np.zeros(space.dim)
    out[i] = z.real
    out[j] = z.imag
    return out


def eval_planar(space, params, z: complex, N: int, t=0j):
    """Complex mirror of the truncated evaluation for in-plane data.

    The in-plane inverse sends w to w/|w|^2, i.e. the conjugate of the
    complex reciprocal, so the fraction is an ordinary continued fraction
    in z and conj(z) rather than a holomorphic one.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    i, j = _plane_axes(space)
    V = t

    def shift_c(n):
        A = params.shift(n)
        return complex(A[i], A[j])

    for n in range(N - 1, 0, -1):
        if V is INFINITY:
            V = 0j
            continue
        W = z - shift_c(n) - V
        s = W.real * W.real + W.imag * W.imag
        if s == 0.0:
            V = INFINITY
            continue
        V = params.scale(n) * (W / s)
    if V is INFINITY:
        return 0j
    W = z - shift_c(0) - V
    s = W.real * W.real + W.imag * W.imag
    if s == 0.0:
        return INFINITY
    return W / s


def planar_orbit(space, params, z: complex, count: int, t=0j) -> list:
    """Iterates of the in-plane period map starting from tail t."""
    p = params.period
    if p is None:
        raise ValueError("planar_orbit needs periodic parameters")
    beta_p = params.scale(p)
    out = []
    for _ in range(count):
        val = eval_planar(space, params, z, p, t)
        t = INFINITY if val is INFINITY else beta_p * val
        out.append(t)
    return out


def _level_matrices(space, params, z: complex):
    """Anti-Moebius matrix of each level of one period, top level first.

    Level n maps the tail t to beta/conj(z - a_n - t), a Moebius map in
    conj(t) with matrix [[0, beta], [-1, conj(z - a_n)]]; the top level
    carries beta_p so the composition equals the scaled period map.
    """
    i, j = _plane_axes(space)
    p = params.period
    mats = []
    for n in range(p):
        A = params.shift(n)
        a_n = complex(A[i], A[j])
        beta = params.scale(p) if n == 0 else params.scale(n)
        w = (z - a_n).conjugate()
        mats.append(MoebiusMap(0.0, beta, -1.0, w, conjugating=True))
    return mats


def planar_reduce(space, params, z: complex) -> MoebiusMap:
    """Compose one period of in-plane levels into a true Moebius map.

    Each level conjugates, so the parity of the period decides whether the
    period map itself is a Moebius map; for odd periods the map composed
    with itself is returned instead, which is always non-conjugating.
    """
    if params.period is None:
        raise ValueError("planar_reduce needs periodic parameters")
    mats = _level_matrices(space, params, z)
    total = mats[0]
    for m in mats[1:]:
        total = total.compose(m)
    if total.conjugating:
        total = total.compose(total)
    return total


CONVERGENT = "convergent"
OSCILLATORY = "oscillatory"
BOUNDARY = "boundary"


def classify_region(space, params, z: complex) -> str:
    """Planar behaviour at z from the period map's multipliers.

    Strictly contracting multipliers mean convergence; a unit-magnitude
    multiplier away from 1 is an elliptic rotation (oscillation); a
    multiplier within 1e-9 of 1 itself is parabolic (the boundary set).
    """
    total = planar_reduce(space, params, z)
    pairs = total.fixed_points_with_multipliers()
    finite = [m for _, m in pairs if math.isfinite(m)]
    if not finite:
        return BOUNDARY
    lam = min(finite)
    if lam < 1.0 - _KIND_BAND:
        return CONVERGENT
    if abs(lam - 1.0) <= _KIND_BAND and len(pairs) == 1:
        return BOUNDARY
    # distinguish parabolic (multiplier ~ 1) from elliptic (e^{i theta})
    a, b, c, d = total.a, total.b, total.c, total.d
    det = total.det
    tr2 = (a + d) ** 2
    tau2 = tr2 / det
    if abs(tau2 - 4.0) <= 4.0 * _KIND_BAND:
        return BOUNDARY
    return OSCILLATORY


def _discriminant_grid(space, params, x1s, x2s) -> np.ndarray:
    """Normalized trace-squared minus 4 of the composed map over a grid.

    Negative values mark elliptic (oscillatory) points.  The composed
    maps here have real normalized trace, so the imaginary part is noise.
    """
    p = params.period
    if p is None:
        raise ValueError("boundary detection needs periodic parameters")
    i, j = _plane_axes(space)
    X1, X2 = np.meshgrid(x1s, x2s, indexing="ij")
    z = X1 + 1j * X2

    def level(n):
        A = params.shift(n)
        a_n = complex(A[i], A[j])
        beta = params.scale(p) if n == 0 else params.scale(n)
        zero = np.zeros_like(z)
        one = np.ones_like(z)
        return (zero, beta * one, -one, np.conj(z - a_n))

    def compose(m1, m2, conj2):
        a1, b1, c1, d1 = m1
        a2, b2, c2, d2 = m2
        if conj2:
            a2, b2, c2, d2 = np.conj(a2), np.conj(b2), np.conj(c2), np.conj(d2)
        return (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2,
                c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)

    total = level(0)
    flag = True
    for n in range(1, p):
        total = compose(total, level(n), flag)
        flag = not flag
    if flag:
        total = compose(total, total, True)
    a, b, c, d = total
    tr = a + d
    det = a * d - b * c
    tau2 = (tr * tr) / det
    return np.real(tau2) - 4.0


def _discriminant_point(space, params, x1: float, x2: float) -> float:
    total = planar_reduce(space, params, complex(x1, x2))
    tau2 = (total.a + total.d) ** 2 / total.det
    return tau2.real - 4.0


def _bisect_edge(space, params, p_neg, p_pos, iters: int = 45):
    """Zero of the discriminant between a negative and a positive endpoint."""
    lo = np.asarray(p_neg, dtype=float)
    hi = np.asarray(p_pos, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if _discriminant_point(space, params, mid[0], mid[1]) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def boundary_loops(space, params, extent=(-1.2, 1.2), resolution: int = 241) -> list:
    """Polylines of the convergent/oscillatory boundary in the plane.

    Marching squares on the sign of the discriminant field, with each
    crossing refined by bisection along its grid edge.  Closed loops are
    returned with the first vertex repeated at the end; chains clipped by
    the window stay open.
    """
    xs = np.linspace(extent[0], extent[1], resolution)
    ys = np.linspace(extent[0], extent[1], resolution)
    disc = _discriminant_grid(space, params, xs, ys)
    # <= keeps isolated parabolic grid points from spawning degenerate loops
    inside = disc <= 0.0

    crossings = {}

    def crossing(kind, i, j):
        key = (kind, i, j)
        if key in crossings:
            return key
        if kind == "h":
            p0 = (xs[i], ys[j])
            p1 = (xs[i + 1], ys[j])
            in0 = inside[i, j]
        else:
            p0 = (xs[i], ys[j])
            p1 = (xs[i], ys[j + 1])
            in0 = inside[i, j]
        neg, pos = (p0, p1) if in0 else (p1, p0)
        crossings[key] = _bisect_edge(space, params, neg, pos)
        return key

    segments = []
    nx, ny = len(xs), len(ys)
    for i in range(nx - 1):
        for j in range(ny - 1):
            b = inside[i, j]
            r = inside[i + 1, j]
            t = inside[i + 1, j + 1]
            l = inside[i, j + 1]
            code = (b, r, t, l)
            if all(code) or not any(code):
                continue
            # edge identifiers: bottom h(i,j), right v(i+1,j), top h(i,j+1), left v(i,j)
            edges = []
            if b != r:
                edges.append(crossing("h", i, j))
            if r != t:
                edges.append(crossing("v", i + 1, j))
            if l != t:
                edges.append(crossing("h", i, j + 1))
            if b != l:
                edges.append(crossing("v", i, j))
            if len(edges) == 2:
                segments.append((edges[0], edges[1]))
            elif len(edges) == 4:
                cx = 0.5 * (xs[i] + xs[i + 1])
                cy = 0.5 * (ys[j] + ys[j + 1])
                center_in = _discriminant_point(space, params, cx, cy) < 0.0
                bottom, right, top, left = edges
                if b == center_in:
                    segments.append((bottom, right))
                    segments.append((top, left))
                else:
                    segments.append((bottom, left))
                    segments.append((top, right))

    adjacency = {}
    for a, bb in segments:
        adjacency.setdefault(a, []).append(bb)
        adjacency.setdefault(bb, []).append(a)

    visited = set()
    loops = []
    for start in sorted(adjacency):
        if start in visited or len(adjacency[start]) != 2:
            continue
        path = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [e for e in adjacency[cur] if e != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            if cur == start:
                path.append(start)
                break
            if cur in visited:
                break
            visited.add(cur)
            path.append(cur)
        pts = np.array([crossings[e] for e in path])
        loops.append(pts)
    loops.sort(key=lambda P: (float(P[:, 0].min()), float(P[:, 1].min())))
    return loops


def infinity_fixed_point_candidates(space, params, extent=(-1.2, 1.2),
                                    starts_per_axis: int = 13) -> list:
    """In-plane Z values at which the period map fixes the point at infinity.

    Such Z solve R_{p-1}(Z, 0) = infinity, i.e. the top-level denominator
    chain vanishes; roots are found by damped Newton from a coarse grid of
    starts and classified by whether iteration from a large planar tail
    runs away (attractive infinity) or falls back (repulsive).
    """
    p = params.period
    if p is None:
        raise ValueError("candidates need periodic parameters")
    if p < 2:
        return []
    i, j = _plane_axes(space)

    def shift_c(n):
        A = params.shift(n)
        return complex(A[i], A[j])

    def D(xy):
        z = complex(xy[0], xy[1])
        v = 0j
        for k in range(p - 2, 0, -1):
            w = z - shift_c(k) - v
            s = w.real * w.real + w.imag * w.imag
            if s == 0.0:
                return np.array([1e300, 1e300])
            v = params.scale(k) * (w / s)
        w0 = z - shift_c(0) - v
        return np.array([w0.real, w0.imag])

    roots = []
    grid = np.linspace(extent[0], extent[1], starts_per_axis)
    for x0 in grid:
        for y0 in grid:
            found = _damped_newton(D, np.array([x0, y0]))
            if found is None:
                continue
            if float(np.linalg.norm(D(found))) > 1e-9 * (1.0 + float(np.linalg.norm(found))):
                continue
            if all(float(np.linalg.norm(found - q)) > 1e-8 for q in roots):
                roots.append(found)
    roots.sort(key=lambda q: (q[0], q[1]))

    out = []
    for root in roots:
        Zc = planar_decode(space, complex(root[0], root[1]))
        votes = 0
        for theta in (0.4, 2.5, 4.6):
            T = planar_decode(space, 1e6 * complex(math.cos(theta), math.sin(theta)))
            diverged = False
            for _ in range(3000):
                T = period_map(space, params, Zc, T)
                if is_infinite(T):
                    diverged = True
                    break
                mag = float(np.linalg.norm(T))
                if mag > 1e9:
                    diverged = True
                    break
                if mag < 1e3:
                    break
            votes += 1 if diverged else -1
        kind = ATTRACTIVE if votes > 0 else REPULSIVE
        total = planar_reduce(space, params, complex(root[0], root[1]))
        mult_inf = abs((total.d * total.a - total.b * total.c) / (total.a * total.a))
        out.append(InfinityCandidate(Zc, float(mult_inf), kind))
    return out
