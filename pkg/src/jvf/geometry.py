"""Signed inner-product spaces and the involutive vector inverse.

The inverse of a finite nonzero vector Z is sigma(Z)/|Z|^2, where sigma
flips the coordinates carrying negative signature.  Zero and the point at
infinity are mutual inverses, which makes inversion a total involution on
the one-point compactification of the space.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidSignatureError


class _Infinity:
    """The unique point at infinity of the one-point compactification."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()

#: A point of the compactified space: a finite coordinate vector or INFINITY.
ExtVector = Union[np.ndarray, _Infinity]


def is_infinite(Z: ExtVector) -> bool:
    return Z is INFINITY


@dataclass(frozen=True)
class SignatureSpace:
    """A Euclidean space with a diagonal +/-1 signature and an embedding axis.

    ``signs`` lists the signature eigenvalues in the canonical basis and
    ``y_index`` selects the basis vector used as the embedding axis.  A
    Jacobi-type fraction additionally needs a mixed signature with
    ``signs[y_index] == -1``; that is checked by :meth:`check`, not at
    construction, so degenerate spaces remain usable for the polynomial
    recurrences on their own.
    """

    signs: tuple
    y_index: int

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        vec = np.asarray(self.signs, dtype=float)
        vec.setflags(write=False)
        object.__setattr__(self, "_signs_vec", vec)
        y = np.zeros(len(self.signs))
        if not 0 <= self.y_index < len(self.signs):
            raise InvalidSignatureError(
                f"y_index {self.y_index} out of range for dimension {len(self.signs)}"
            )
        y[self.y_index] = 1.0
        y.setflags(write=False)
        object.__setattr__(self, "_y_vec", y)

    @property
    def dim(self) -> int:
        return len(self.signs)

    @property
    def signs_vec(self) -> np.ndarray:
        return self._signs_vec

    @property
    def y_vector(self) -> np.ndarray:
        return self._y_vec

    def check(self):
        """Raise InvalidSignatureError unless the space admits a JVF."""
        if any(s not in (-1, 1) for s in self.signs):
            raise InvalidSignatureError("signature entries must be +1 or -1")
        if 1 not in self.signs or -1 not in self.signs:
            raise InvalidSignatureError(
                "signature must mix at least one +1 and one -1"
            )
        if self.signs[self.y_index] != -1:
            raise InvalidSignatureError(
                "the embedding axis must carry signature -1"
            )
        return self


def conjugate(space: SignatureSpace, Z: ExtVector) -> ExtVector:
    """Apply the signature flip; infinity is its own conjugate."""
    if Z is INFINITY:
        return INFINITY
    return space.signs_vec * np.asarray(Z, dtype=float)


def sqnorm(Z) -> float:
    """Left-to-right accumulated |Z|^2 (bitwise-stable across code paths)."""
    return float(np.einsum("i,i->", Z, Z))


def invert(space: SignatureSpace, Z: ExtVector) -> ExtVector:
    """Involutive inverse: sigma(Z)/|Z|^2, with 0 and INFINITY swapped."""
    if Z is INFINITY:
        return np.zeros(space.dim)
    Z = np.asarray(Z, dtype=float)
    s = sqnorm(Z)
    if s == 0.0:
        return INFINITY
    return (space.signs_vec * Z) / s


def y_component(space: SignatureSpace, Z: ExtVector) -> float:
    """Coordinate of Z along the embedding axis (finite Z only)."""
    if Z is INFINITY:
        raise ValueError("y_component is undefined at infinity")
    return float(np.asarray(Z)[space.y_index])
