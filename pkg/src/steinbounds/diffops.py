"""Substitution, difference, and deletion operators on configurations.

All operators are pure: configurations are copied, never mutated in place.
Indices are 0-based throughout.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .core import Functional
from .errors import (
    ArityMismatch,
    ArityTooLarge,
    DuplicateIndex,
    FixedArityFunctional,
    IndexOutOfRange,
    LengthMismatch,
)

BASE, PRIME, TILDE = 0, 1, 2


def _check_pair(f: Functional, y: np.ndarray, yp: np.ndarray) -> None:
    if len(y) != len(yp):
        raise ArityMismatch("y and y' must have equal length")
    if f.arity is not None and len(y) != f.arity:
        raise ArityMismatch(f"configuration length {len(y)} != arity {f.arity}")


def _normalize_indices(n: int, indices: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(i) for i in indices)
    for i in out:
        if not 0 <= i < n:
            raise IndexOutOfRange(f"index {i} outside [0, {n})")
    if len(set(out)) != len(out):
        raise DuplicateIndex(f"indices {out} contain duplicates")
    return out


def substituted(y: np.ndarray, yp: np.ndarray, subset: Sequence[int]) -> np.ndarray:
    """The vector y with coordinates in subset taken from y'."""
    out = np.array(y, copy=True)
    idx = list(subset)
    if idx:
        out[idx] = yp[idx]
    return out


def substitute(f: Functional, y: np.ndarray, yp: np.ndarray,
               subset: Sequence[int]) -> float:
    """f evaluated at y with coordinates in subset replaced from y'."""
    _check_pair(f, y, yp)
    subset = _normalize_indices(len(y), subset)
    return f(substituted(y, yp, subset))


def delta(f: Functional, y: np.ndarray, yp: np.ndarray,
          subset: Sequence[int]) -> float:
    """f(y) minus f with the subset coordinates replaced from y'."""
    _check_pair(f, y, yp)
    subset = _normalize_indices(len(y), subset)
    return f(y) - f(substituted(y, yp, subset))


def delta_iterated(f: Functional, y: np.ndarray, yp: np.ndarray,
                   indices: Sequence[int]) -> float:
    """Iterated single-coordinate difference over distinct indices.

    Defined recursively: the order-k operator is the order-(k-1) value minus
    the same value with the last index's base coordinate replaced from y'.
    The result is invariant under permutations of the indices.
    """
    _check_pair(f, y, yp)
    indices = _normalize_indices(len(y), indices)
    if not indices:
        return f(y)

    def rec(base: np.ndarray, rem: tuple[int, ...]) -> float:
        if not rem:
            return f(base)
        head, tail = rem[:-1], rem[-1]
        swapped = np.array(base, copy=True)
        swapped[tail] = yp[tail]
        return rec(base, head) - rec(swapped, head)

    return rec(np.array(y, copy=True), indices)


def delta_iterated_inclusion_exclusion(f: Functional, y: np.ndarray,
                                       yp: np.ndarray,
                                       indices: Sequence[int]) -> float:
    """Independent cross-check path: alternating sum of f^A over A within the
    index set, signed by |A|.  Must agree exactly with delta_iterated."""
    _check_pair(f, y, yp)
    indices = _normalize_indices(len(y), indices)
    total = 0.0
    for r in range(len(indices) + 1):
        for sub in itertools.combinations(indices, r):
            total += (-1) ** r * f(substituted(y, yp, sub))
    return total


def telescoping_residual(f: Functional, y: np.ndarray, yp: np.ndarray) -> float:
    """|f(y) - f(y') - alternating subset sum of iterated differences of
    (y', y)|; identically zero up to floating round-off.

    Cost is 3^n subset-pair terms over 2^n cached evaluations, so n <= 12.
    """
    _check_pair(f, y, yp)
    n = len(y)
    if n > 12:
        raise ArityTooLarge(f"telescoping residual needs 2^n work; n={n} > 12")
    # Cache f^A(y', y) for every subset A, keyed by bitmask.
    cache = np.empty(2**n)
    for mask in range(2**n):
        sub = [i for i in range(n) if mask >> i & 1]
        cache[mask] = f(substituted(yp, y, sub))
    rhs = 0.0
    for bmask in range(1, 2**n):
        k = bin(bmask).count("1")
        # Iterated delta over the indices of bmask via inclusion-exclusion.
        val = 0.0
        sub = bmask
        while True:
            val += (-1) ** bin(sub).count("1") * cache[sub]
            if sub == 0:
                break
            sub = (sub - 1) & bmask
        rhs += (-1) ** k * val
    lhs = f(np.asarray(y)) - f(np.asarray(yp))
    return abs(lhs - rhs)


def deleted(y: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    """Configuration with the listed coordinates removed."""
    return np.delete(np.asarray(y), list(indices), axis=0)


def _check_deletion(f: Functional, y: np.ndarray, *indices: int) -> None:
    if f.arity is not None:
        raise FixedArityFunctional(
            f"deletion needs a variable-length functional, got arity {f.arity}"
        )
    for i in indices:
        if not 0 <= i < len(y):
            raise IndexOutOfRange(f"index {i} outside [0, {len(y)})")


def delete(f: Functional, y: np.ndarray, i: int) -> float:
    """First-order deletion difference: f(y) - f(y without coordinate i)."""
    _check_deletion(f, y, i)
    return f(np.asarray(y)) - f(deleted(y, [i]))


def delete2(f: Functional, y: np.ndarray, i: int, j: int) -> float:
    """Second-order deletion difference, symmetric in (i, j)."""
    if i == j:
        raise DuplicateIndex("delete2 needs i != j")
    _check_deletion(f, y, i, j)
    return (
        f(np.asarray(y))
        - f(deleted(y, [i]))
        - f(deleted(y, [j]))
        + f(deleted(y, [i, j]))
    )


def recombine(x: np.ndarray, xp: np.ndarray, xt: np.ndarray,
              choices: Sequence[int]) -> np.ndarray:
    """Coordinate-wise selection among three independent copies.

    choices is a length-n vector over {BASE, PRIME, TILDE}.
    """
    x, xp, xt = np.asarray(x), np.asarray(xp), np.asarray(xt)
    if not (len(x) == len(xp) == len(xt) == len(choices)):
        raise LengthMismatch("recombination inputs must share one length")
    choices = np.asarray(choices, dtype=np.int64)
    out = np.array(x, copy=True)
    out[choices == PRIME] = xp[choices == PRIME]
    out[choices == TILDE] = xt[choices == TILDE]
    return out
