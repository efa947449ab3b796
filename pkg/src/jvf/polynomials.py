"""Scalar and vector polynomial recurrences attached to the fraction.

The denominator-type scalars p_n and vectors P_n satisfy

    P_{n+1} = (Z - A_n) p_n - beta_n P_n*
    p_{n+1} = |Z - A_n|^2 p_n + beta_n^2 p_{n-1} - 2 beta_n (Z - A_n) . P_n*

with p_{-1} = 0, p_0 = 1, P_0 = 0, where * is the signature conjugate.
The numerator-type pair (q_n, Q_n) obeys the same recurrence with every
coefficient index raised by one.  The scalars grow or shrink over many
orders of magnitude at useful depths, so states carry base-10 exponents
and mantissas renormalized each step; p_n p_{n-1} = |P_n|^2 holds exactly
in this split because P_n's exponent is the mean of its neighbours'.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominatorError, FragmentSingularError
from .fraction import forward_fragment, reverse_fragment
from .geometry import INFINITY, SignatureSpace


@dataclass(frozen=True)
class PolyState:
    """Level-n snapshot: mantissas of (p_{n-1}, p_n, P_n) and their exponents.

    True values are ``p_cur * 10**exp_cur``, ``p_prev * 10**exp_prev`` and
    ``P_cur * 10**((exp_cur + exp_prev)/2)``.
    """

    n: int
    p_prev: float
    p_cur: float
    P_cur: np.ndarray
    exp_cur: float
    exp_prev: float

    @property
    def log10_p(self) -> float:
        """log10 of p_n; -inf if the mantissa vanished."""
        if self.p_cur == 0.0:
            return -math.inf
        return self.exp_cur + math.log10(abs(self.p_cur))

    @property
    def log10_p_prev(self) -> float:
        if self.p_prev == 0.0:
            return -math.inf
        return self.exp_prev + math.log10(abs(self.p_prev))

    @property
    def vector_exp(self) -> float:
        """Base-10 exponent carried by the P_n mantissa."""
        return 0.5 * (self.exp_cur + self.exp_prev)

    def identity_residual(self) -> float:
        """Relative residual of p_n p_{n-1} = |P_n|^2 (exponents cancel)."""
        lhs = self.p_cur * self.p_prev
        rhs = float(self.P_cur @ self.P_cur)
        m = max(abs(lhs), abs(rhs))
        if m == 0.0:
            return 0.0
        return abs(lhs - rhs) / m


def init_state(space: SignatureSpace) -> PolyState:
    """Level-0 state: p_{-1} = 0, p_0 = 1, P_0 = 0."""
    return PolyState(0, 0.0, 1.0, np.zeros(space.dim), 0.0, 0.0)


def step_first_kind(state: PolyState, space: SignatureSpace, Z, A, beta: float) -> PolyState:
    """Advance one level with coefficients (A, beta) and renormalize."""
    Z = np.asarray(Z, dtype=float)
    A = np.asarray(A, dtype=float)
    r = 10.0 ** (0.5 * (state.exp_prev - state.exp_cur))
    W = Z - A
    w2 = float(W @ W)
    Pconj = space.signs_vec * state.P_cur
    p_next = (w2 * state.p_cur + beta * beta * state.p_prev * (r * r)
              - 2.0 * beta * float(W @ Pconj) * r)
    P_next = W * state.p_cur - beta * Pconj * r
    if p_next != 0.0 and math.isfinite(p_next):
        s = float(math.floor(math.log10(abs(p_next))))
    else:
        s = 0.0
    scale = 10.0 ** (-s)
    return PolyState(
        n=state.n + 1,
        p_prev=state.p_cur,
        p_cur=p_next * scale,
        P_cur=P_next * (10.0 ** (-0.5 * s)),
        exp_cur=state.exp_cur + s,
        exp_prev=state.exp_cur,
    )


def _sequence(space, params, Z, N, offset):
    state = init_state(space)
    states = [state]
    for k in range(N):
        state = step_first_kind(state, space, Z,
                                params.shift(k + offset),
                                params.scale(k + offset))
        states.append(state)
    return states


def first_kind_sequence(space, params, Z, N: int) -> list:
    """States for p_0..p_N (denominator kind)."""
    return _sequence(space, params, Z, N, offset=0)


def second_kind_sequence(space, params, Z, N: int) -> list:
    """States for q_0..q_N: same recurrence with coefficient indices shifted by one."""
    return _sequence(space, params, Z, N, offset=1)


def product_form_first_kind(space, params, Z, N: int, reverse: bool = False) -> float:
    """log10 p_N from the product of inverse squared fragment magnitudes.

    The forward route multiplies 1/|R^(k, N-1)|^2 for k = 0..N-1; with
    ``reverse`` it multiplies 1/|S^(k, 0)|^2 instead.  Quadratic in N and
    intended as a cross-check of the recurrence, not a production path.
    """
    total = 0.0
    for k in range(N):
        if reverse:
            frag = reverse_fragment(space, params, Z, k, 0)
        else:
            frag = forward_fragment(space, params, Z, k, N - 1)
        if frag is INFINITY:
            raise FragmentSingularError(k)
        mag2 = float(frag @ frag)
        if mag2 == 0.0:
            raise FragmentSingularError(k)
        total -= math.log10(mag2)
    return total


def _bracket_chain(space, params, Z, n: int) -> list:
    """Stable values of b_m = P_m*/p_m - Q_{m-1}*/q_{m-1} for m = 1..n.

    Both terms equal down-running fragment values whose difference shrinks
    geometrically; subtracting them directly loses all accuracy.  Writing
    consecutive fragments as inversions of W1 and W2 = W1 - delta gives

        1/W1 - 1/W2 = sigma(delta |W1|^2 - 2 (W1.delta) W1 + |delta|^2 W1) / (|W1|^2 |W2|^2)

    whose right side is linear in delta, so the chain keeps full relative
    precision with delta = -beta_k b_{k} supplied by the previous member.
    """
    Z = np.asarray(Z, dtype=float)
    signs = space.signs_vec
    W = Z - params.shift(0)
    s = float(W @ W)
    if s == 0.0:
        raise DegenerateDenominatorError("fragment vanished in bracket chain")
    sp = (signs * W) / s
    sq = np.zeros(space.dim)
    br = sp.copy()
    brackets = [None, br]
    for m in range(2, n + 1):
        k = m - 1
        b = params.scale(k)
        A = params.shift(k)
        W1 = Z - A - b * sp
        W2 = Z - A - b * sq
        s1 = float(W1 @ W1)
        s2 = float(W2 @ W2)
        if s1 == 0.0 or s2 == 0.0:
            raise DegenerateDenominatorError("fragment vanished in bracket chain")
        delta = -b * br
        num = delta * s1 - 2.0 * float(W1 @ delta) * W1 + float(delta @ delta) * W1
        br = (signs * num) / (s1 * s2)
        sp = (signs * W1) / s1
        sq = (signs * W2) / s2
        brackets.append(br)
    return brackets


def christoffel_darboux_sides(space, params, Z, n: int) -> tuple:
    """log10 of both sides of the two-kind product identity at level n.

    The identity ties p_n q_{n-1} |P_{n+1}/p_n - Q_n/q_{n-1}|^2 to the same
    expression one level down scaled by beta_n^2; repeated application
    collapses it to the pure scale product (beta_1 ... beta_n)^2.
    """
    if n < 2:
        raise ValueError("the identity needs n >= 2")
    p_states = _sequence(space, params, Z, n, offset=0)
    q_states = _sequence(space, params, Z, n - 1, offset=1)
    brackets = _bracket_chain(space, params, Z, n)
    for st in (p_states[n], p_states[n - 1], q_states[n - 1], q_states[n - 2]):
        if st.p_cur == 0.0:
            raise DegenerateDenominatorError("vanishing scalar polynomial")
    b_n = params.scale(n)
    b_nm1 = params.scale(n - 1)
    mag_n = float(np.linalg.norm(brackets[n]))
    mag_nm1 = float(np.linalg.norm(brackets[n - 1]))
    if mag_n == 0.0 or mag_nm1 == 0.0:
        raise DegenerateDenominatorError("vanishing bracket difference")
    lhs = (p_states[n].log10_p + q_states[n - 1].log10_p
           + 2.0 * (math.log10(b_n) + math.log10(mag_n)))
    rhs = (2.0 * math.log10(b_n) + p_states[n - 1].log10_p
           + q_states[n - 2].log10_p
           + 2.0 * (math.log10(b_nm1) + math.log10(mag_nm1)))
    return lhs, rhs


def christoffel_darboux_residual(space, params, Z, n: int) -> float:
    """Max-relative residual between the two sides of the identity."""
    lhs, rhs = christoffel_darboux_sides(space, params, Z, n)
    m = max(lhs, rhs)
    return abs(10.0 ** (lhs - m) - 10.0 ** (rhs - m))
