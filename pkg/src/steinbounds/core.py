"""Sample spaces, product distributions, functionals, and reproducible RNG streams.

Configurations are plain numpy arrays: an integer vector of symbol indices for
finite alphabets, a float array of shape (n, d) for points in the unit cube.
All operations treat configurations as immutable and copy before modifying.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import ArityMismatch, CapExceeded

DEFAULT_ENUMERATION_CAP = 10**7

# Canonical stream roles.  Distinct (replication, role) pairs map to
# independent counter-based streams, so parallel scheduling order can never
# change results.
ROLE_X = "X"
ROLE_PRIME = "X-prime"
ROLE_TILDE = "X-tilde"
ROLE_INTEGRATION = "integration"
ROLE_SUBSET = "subset-sampler"
ROLE_BOOTSTRAP = "bootstrap"


@dataclass(frozen=True)
class FiniteAlphabet:
    """Finite sample space; symbols are arbitrary distinct hashable labels."""

    symbols: tuple

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ValueError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class UnitCube:
    """[0,1]^d with the uniform (Lebesgue) distribution."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("cube dimension must be >= 1")


SampleSpace = Union[FiniteAlphabet, UnitCube]


@dataclass(frozen=True)
class Distribution:
    """Common per-coordinate law of the i.i.d. input vector.

    Finite alphabets carry an explicit probability vector; the cube is always
    uniform Lebesgue.
    """

    space: SampleSpace
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if isinstance(self.space, FiniteAlphabet):
            w = self.weights
            if w is None:
                w = np.full(self.space.size, 1.0 / self.space.size)
            w = np.asarray(w, dtype=float)
            if w.shape != (self.space.size,):
                raise ValueError("weight vector length must match alphabet size")
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")
            object.__setattr__(self, "weights", w)
        else:
            if self.weights is not None:
                raise ValueError("cube distributions are uniform; weights not allowed")

    @property
    def is_finite(self) -> bool:
        return isinstance(self.space, FiniteAlphabet)


def alphabet(symbols: Sequence, weights=None) -> Distribution:
    return Distribution(FiniteAlphabet(tuple(symbols)), weights)


def cube(d: int) -> Distribution:
    return Distribution(UnitCube(d))


# A configuration is an ordered n-tuple from E, stored as a numpy array.
PointConfiguration = np.ndarray


@dataclass(frozen=True)
class Functional:
    """An evaluatable map from configurations to the reals.

    arity is the fixed input length, or None for variable-length functionals
    that also accept shorter configurations (required by deletion operators).
    evaluate must be deterministic: identical arrays give bit-identical
    output.  evaluate_batch, when provided, maps a stacked array of
    configurations to the vector of values and must agree with evaluate
    row by row; estimators use it as a fast path.
    """

    evaluate: Callable[[np.ndarray], float]
    arity: Optional[int] = None
    symmetric: bool = False
    name: str = ""
    evaluate_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, config: np.ndarray) -> float:
        if self.arity is not None and len(config) != self.arity:
            raise ArityMismatch(
                f"functional {self.name or '<anon>'} expects length {self.arity}, "
                f"got {len(config)}"
            )
        return float(self.evaluate(config))

    def batch(self, configs: np.ndarray) -> np.ndarray:
        if self.evaluate_batch is not None:
            return np.asarray(self.evaluate_batch(configs), dtype=float)
        return np.array([self.evaluate(row) for row in configs], dtype=float)


def _role_tag(role: str) -> int:
    digest = hashlib.sha256(role.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class SeedPolicy:
    """Derives independent RNG streams from (master seed, replication, role).

    Streams use the counter-based Philox generator keyed by a hash of the
    triple, so two runs with the same master seed reproduce every draw exactly
    and distinct (replication, role) pairs never share state.
    """

    master_seed: int = 0

    def stream(self, replication: int, role: str = ROLE_X) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=self.master_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=(replication & 0xFFFFFFFFFFFFFFFF, _role_tag(role)),
        )
        return np.random.Generator(np.random.Philox(seq))

    def child(self, tag: str) -> "SeedPolicy":
        """Policy for an independent sub-experiment, derived by hashing the
        master seed with the tag; children with distinct tags never share
        streams with each other or with the parent."""
        mix = hashlib.sha256(
            (self.master_seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
            + tag.encode("utf-8")
        ).digest()
        return SeedPolicy(int.from_bytes(mix[:8], "little"))


def sample_iid(dist: Distribution, n: int, stream: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. coordinates from dist, order preserved."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if dist.is_finite:
        return stream.choice(dist.space.size, size=n, p=dist.weights)
    return stream.random((n, dist.space.d))


def symbol_values(dist: Distribution) -> np.ndarray:
    """Alphabet symbols as a float array (for numeric functionals)."""
    if not dist.is_finite:
        raise ValueError("symbol_values needs a finite alphabet")
    return np.asarray(dist.space.symbols, dtype=float)


def enumeration_size(dist: Distribution, n: int) -> int:
    if not dist.is_finite:
        raise CapExceeded("exact enumeration requires a finite alphabet")
    return dist.space.size**n


def enumerate_configurations(
    dist: Distribution, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[np.ndarray, float]]:
    """Yield every configuration in E^n with its product probability.

    Configurations are index arrays; probabilities sum to 1 within 1e-12.
    Raises CapExceeded when |E|^n is over the cap.
    """
    total = enumeration_size(dist, n)
    if total > cap:
        raise CapExceeded(f"|E|^n = {total} exceeds cap {cap}")
    w = dist.weights
    for combo in itertools.product(range(dist.space.size), repeat=n):
        idx = np.array(combo, dtype=np.int64)
        prob = float(np.prod(w[idx]))
        yield idx, prob


def configuration_probabilities(
    dist: Distribution, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """Flat vector of product probabilities over E^n in lexicographic order."""
    total = enumeration_size(dist, n)
    if total > cap:
        raise CapExceeded(f"|E|^n = {total} exceeds cap {cap}")
    p = np.array([1.0])
    for _ in range(n):
        p = np.kron(p, dist.weights)
    return p


def value_table(f: Functional, dist: Distribution, n: int,
                cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Evaluate f on every configuration; returns an array of shape (K,)*n."""
    k = dist.space.size  # raises for cube via enumeration_size below
    total = enumeration_size(dist, n)
    if total > cap:
        raise CapExceeded(f"|E|^n = {total} exceeds cap {cap}")
    out = np.empty(total)
    for flat, combo in enumerate(itertools.product(range(k), repeat=n)):
        out[flat] = f(np.array(combo, dtype=np.int64))
    return out.reshape((k,) * n)


def table_functional(table: np.ndarray, name: str = "table") -> Functional:
    """Wrap a dense lookup table over E^n as a fixed-arity functional."""
    n = table.ndim
    return Functional(
        evaluate=lambda x, _t=table: _t[tuple(np.asarray(x, dtype=np.int64))],
        arity=n,
        symmetric=False,
        name=name,
    )


def check_symmetry(f: Functional, config: np.ndarray,
                   stream: np.random.Generator, trials: int = 20) -> bool:
    """Spot-check the symmetric flag: exact equality under random permutations."""
    base = f(config)
    for _ in range(trials):
        perm = stream.permutation(len(config))
        if f(config[perm]) != base:
            return False
    return True
