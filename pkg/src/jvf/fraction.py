"""Jacobi-type vector continued fractions: parameters and evaluation.

A fraction is specified by boundary-orthogonal shift vectors {A_n} and
positive scales {beta_n}.  Truncated evaluation replaces the tail beyond
level N by an arbitrary point T of the compactified space:

    R_N(Z, T) = 1/(Z - A_0 - beta_1/(Z - A_1 - ... - beta_{N-1}/(Z - A_{N-1} - T)))

where 1/W is the involutive inverse of the ambient signature space.  The
leading level carries no scale; callers multiply by beta_0 (or beta_p for
period maps) where a scaled value is wanted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import (
    DimensionMismatchError,
    NonPositiveScaleError,
    NotConvergedError,
    OnBoundaryError,
    ShiftHasYComponentError,
)
from .geometry import INFINITY, ExtVector, SignatureSpace, sqnorm


@dataclass(frozen=True)
class JvfParams:
    """Shift vectors and scales, optionally wrapped with a period.

    ``shifts[n]`` is A_n and ``scales[n]`` is beta_n.  When ``period`` is
    set, indices beyond the stored lists wrap with A_{n+p} = A_n and
    beta_{n+p} = beta_n, so arbitrarily deep fractions need only one
    period of storage.
    """

    shifts: np.ndarray
    scales: np.ndarray
    period: int | None = None

    def __post_init__(self):
        shifts = np.atleast_2d(np.asarray(self.shifts, dtype=float))
        scales = np.atleast_1d(np.asarray(self.scales, dtype=float))
        shifts.setflags(write=False)
        scales.setflags(write=False)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "scales", scales)
        if self.period is not None:
            p = int(self.period)
            if p < 1:
                raise ValueError("period must be a positive integer")
            if len(shifts) < p or len(scales) < p:
                raise ValueError("periodic parameters must store a full period")
            object.__setattr__(self, "period", p)

    def _resolve(self, n: int, length: int) -> int:
        if 0 <= n < length:
            return n
        if n < 0:
            raise IndexError(f"negative coefficient index {n}")
        if self.period is None:
            raise IndexError(
                f"index {n} beyond stored coefficients of an aperiodic fraction"
            )
        base = length - self.period
        return base + (n - base) % self.period

    def shift(self, n: int) -> np.ndarray:
        return self.shifts[self._resolve(n, len(self.shifts))]

    def scale(self, n: int) -> float:
        return float(self.scales[self._resolve(n, len(self.scales))])


def threefold_params(a: float = 0.4, beta: float = 0.25) -> JvfParams:
    """Period-3 parameter set with three-fold symmetric planar shifts.

    This is the bundled default experiment: shifts of magnitude ``a`` at
    angles 0, 2*pi/3 and 4*pi/3 in the (x1, x2) plane of a 3-D space with
    signature (+1, +1, -1), all scales equal to ``beta``.
    """
    angles = [0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0]
    shifts = [[a * math.cos(t), a * math.sin(t), 0.0] for t in angles]
    return JvfParams(shifts, [beta, beta, beta], period=3)


def validate(space: SignatureSpace, params: JvfParams) -> None:
    """Check the fraction hypotheses; raises on the first violation."""
    space.check()
    for n, A in enumerate(params.shifts):
        if A.shape[0] != space.dim:
            raise DimensionMismatchError(n, A.shape[0], space.dim)
        if A[space.y_index] != 0.0:
            raise ShiftHasYComponentError(n, float(A[space.y_index]))
    for n, b in enumerate(params.scales):
        if not b > 0.0:
            raise NonPositiveScaleError(n, float(b))


def _descend(space, params, Z, top, V):
    """Apply levels top-1 .. 1 to the tail V, then the unscaled level 0."""
    signs = space.signs_vec
    for n in range(top - 1, 0, -1):
        if V is INFINITY:
            V = np.zeros(space.dim)
            continue
        W = Z - params.shift(n) - V
        s = sqnorm(W)
        if s == 0.0:
            V = INFINITY
            continue
        V = params.scale(n) * ((signs * W) / s)
    if V is INFINITY:
        return np.zeros(space.dim)
    W = Z - params.shift(0) - V
    s = sqnorm(W)
    if s == 0.0:
        return INFINITY
    return (signs * W) / s


def eval_truncated(space, params, Z, N: int, T: ExtVector | None = None) -> ExtVector:
    """Evaluate R_N(Z, T) bottom-up; total on the compactified space.

    A subtraction against an infinite tail yields infinity, whose inverse
    is zero, so exact zeros and infinities propagate instead of raising.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    Z = np.asarray(Z, dtype=float)
    V = np.zeros(space.dim) if T is None else T
    return _descend(space, params, Z, N, V)


def eval_truncated_batch(space, params, Zs, N: int, Ts=None):
    """Vectorized R_N over many points (or many tails) at once.

    ``Zs`` is (m, dim) or (dim,); ``Ts`` is None (zero tails) or an array
    broadcastable to the same shape.  Returns ``(values, infinite)`` where
    ``infinite`` marks rows whose result is the point at infinity (their
    value rows are placeholders).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    Zs = np.atleast_2d(np.asarray(Zs, dtype=float))
    if Ts is None:
        Vs = np.zeros_like(Zs)
    else:
        Ts = np.atleast_2d(np.asarray(Ts, dtype=float))
        Zs, Vs = np.broadcast_arrays(Zs, Ts)
        Zs = Zs.copy()
        Vs = Vs.copy()
    m = Zs.shape[0]
    signs = space.signs_vec
    inf = np.zeros(m, dtype=bool)
    for n in range(N - 1, 0, -1):
        b = params.scale(n)
        W = Zs - params.shift(n) - Vs
        s = np.einsum("ij,ij->i", W, W)
        newinf = (s == 0.0) & ~inf
        safe = np.where(s == 0.0, 1.0, s)
        Vs = b * ((signs * W) / safe[:, None])
        Vs[inf] = 0.0
        Vs[newinf] = 0.0
        inf = newinf
    W = Zs - params.shift(0) - Vs
    s = np.einsum("ij,ij->i", W, W)
    newinf = (s == 0.0) & ~inf
    safe = np.where(s == 0.0, 1.0, s)
    out = (signs * W) / safe[:, None]
    out[inf] = 0.0
    out[newinf] = 0.0
    return out, newinf


def forward_fragment(space, params, Z, m: int, n: int) -> ExtVector:
    """Contiguous sub-fraction over levels m..n (leading level unscaled).

    Returns the zero vector when m > n.
    """
    Z = np.asarray(Z, dtype=float)
    if m > n:
        return np.zeros(space.dim)
    signs = space.signs_vec
    V: ExtVector = np.zeros(space.dim)
    for k in range(n, m, -1):
        if V is INFINITY:
            V = np.zeros(space.dim)
            continue
        W = Z - params.shift(k) - V
        s = sqnorm(W)
        if s == 0.0:
            V = INFINITY
            continue
        V = params.scale(k) * ((signs * W) / s)
    if V is INFINITY:
        return np.zeros(space.dim)
    W = Z - params.shift(m) - V
    s = sqnorm(W)
    if s == 0.0:
        return INFINITY
    return (signs * W) / s


def reverse_fragment(space, params, Z, m: int, n: int) -> ExtVector:
    """Sub-fraction running down from level m to level n (m >= n).

    The level holding A_{k} couples to the next through beta_{k+1}, so the
    scales appear with the index of the level above.  Returns the zero
    vector when m < n.
    """
    Z = np.asarray(Z, dtype=float)
    if m < n:
        return np.zeros(space.dim)
    signs = space.signs_vec
    V: ExtVector = np.zeros(space.dim)
    for k in range(n, m):
        if V is INFINITY:
            V = np.zeros(space.dim)
            continue
        W = Z - params.shift(k) - V
        s = sqnorm(W)
        if s == 0.0:
            V = INFINITY
            continue
        V = params.scale(k + 1) * ((signs * W) / s)
    if V is INFINITY:
        return np.zeros(space.dim)
    W = Z - params.shift(m) - V
    s = sqnorm(W)
    if s == 0.0:
        return INFINITY
    return (signs * W) / s


def _rotated(params: JvfParams, r: int) -> JvfParams:
    """One stored period of coefficients advanced by r (periodic only)."""
    p = params.period
    shifts = [params.shift(r + k) for k in range(p)]
    scales = [params.scale(r + k) for k in range(p)]
    return JvfParams(np.array(shifts), np.array(scales), period=p)


def truncation_sequence(space, params, Z, n_max: int) -> list:
    """R_N(Z, 0) for N = 1..n_max; entry 0 of the returned list is None.

    Periodic parameter sets share tails between depths that agree modulo
    the period, which brings the cost down from O(n_max^2) to O(n_max).
    """
    Z = np.asarray(Z, dtype=float)
    out = [None] * (n_max + 1)
    if params.period is None:
        for N in range(1, n_max + 1):
            out[N] = eval_truncated(space, params, Z, N)
        return out
    p = params.period
    for r in range(1, p + 1):
        rot = _rotated(params, r)
        beta_r = params.scale(r)
        T: ExtVector = np.zeros(space.dim)
        j = 0
        while j * p + r <= n_max:
            N = j * p + r
            out[N] = _descend(space, params, Z, r, T)
            # advance the tail by one period: T_{j+1} = beta_r * R_p^{(r)}(Z, T_j)
            inner = eval_truncated(space, rot, Z, p, T)
            T = INFINITY if inner is INFINITY else beta_r * inner
            j += 1
    return out


@dataclass(frozen=True)
class ConvergedValue:
    value: np.ndarray
    levels_used: int
    bound: float  # guaranteed diameter 2*rho_N of the remaining-value ball


def eval_converged(space, params, Z, rel_tol: float = 1e-10,
                   max_levels: int = 200_000) -> ConvergedValue:
    """Deepen the truncation until the error ball is small relative to the value.

    Returns the value at the smallest N whose guaranteed diameter 2*rho_N
    is at most ``rel_tol * |R_N|``.  Raises OnBoundaryError for Z on the
    boundary hyperplane and NotConvergedError when ``max_levels`` is hit.
    """
    from . import convergence  # deferred: convergence builds on this module

    Z = np.asarray(Z, dtype=float)
    if geometry.y_component(space, Z) == 0.0:
        raise OnBoundaryError("Z lies on the boundary hyperplane")
    log2 = math.log10(2.0)
    N = 16
    while True:
        N = min(N, max_levels)
        rho_log = convergence.error_radius_sequence(space, params, Z, N)
        value_N = eval_truncated(space, params, Z, N)
        if value_N is not INFINITY:
            norm = float(np.linalg.norm(value_N))
            if norm > 0.0:
                target = math.log10(rel_tol) + math.log10(norm)
                hits = np.nonzero(rho_log[1:N + 1] + log2 <= target)[0]
                for idx in hits[:8]:
                    n_star = int(idx) + 1
                    value = eval_truncated(space, params, Z, n_star)
                    if value is INFINITY:
                        continue
                    vnorm = float(np.linalg.norm(value))
                    bound_log = rho_log[n_star] + log2
                    if vnorm > 0.0 and bound_log <= math.log10(rel_tol * vnorm):
                        return ConvergedValue(value, n_star, 10.0 ** bound_log)
        if N >= max_levels:
            achieved = 10.0 ** (rho_log[N] + log2)
            raise NotConvergedError(achieved, N)
        N *= 2
