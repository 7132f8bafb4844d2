"""Pure states on a block matrix algebra: vector states and sampling.

A pure state is a unit vector v in one block, acting by f(a) = v* a_i v.
Block indices are 0-based.  Sampling is deterministic given (strategy,
seed, count); the eigen-directed strategy augments a sample with
eigenvector states of caller-supplied elements, which is how norm-attaining
states enter coercivity searches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraShape, hermitian_eigensystem
from .errors import ShapeMismatch, ZeroElement

UNIT_VECTOR_TOL = 1e-12
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class PureState:
    shape: AlgebraShape
    block_index: int
    vector: np.ndarray

    def __post_init__(self):
        if not 0 <= self.block_index < self.shape.num_blocks:
            raise ShapeMismatch(
                f"block index {self.block_index} outside shape {self.shape.block_dims}"
            )
        v = np.asarray(self.vector, dtype=np.complex128)
        n = self.shape.block_dims[self.block_index]
        if v.shape != (n,):
            raise ShapeMismatch(f"state vector has length {v.shape}, block needs {n}")
        if abs(np.linalg.norm(v) - 1.0) > UNIT_VECTOR_TOL:
            raise ValueError("state vector must have unit norm")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    def to_json(self) -> dict:
        return {
            "block": self.block_index,
            "vector": [[float(z.real), float(z.imag)] for z in self.vector],
        }

    @staticmethod
    def from_json(shape: AlgebraShape, data: dict) -> "PureState":
        vec = np.array([complex(p[0], p[1]) for p in data["vector"]])
        return PureState(shape, int(data["block"]), vec)


def evaluate(f: PureState, a: AlgebraElement) -> complex:
    """f(a) = v* a_block v."""
    if f.shape != a.shape:
        raise ShapeMismatch(f"state over {f.shape} applied to element over {a.shape}")
    blk = a.blocks[f.block_index]
    return complex(f.vector.conj() @ blk @ f.vector)


def norm_attaining_state(a: AlgebraElement, tol: float = 1e-12) -> PureState:
    """Eigenvector state of the top eigenvalue: f(a) = ||a|| for positive a."""
    es = hermitian_eigensystem(a)
    best_block, best_val = 0, -math.inf
    for i, lam in enumerate(es.eigenvalues):
        if float(lam[0]) > best_val:
            best_block, best_val = i, float(lam[0])
    if best_val <= tol:
        raise ZeroElement("norm-attaining state needs a nonzero positive element")
    vec = es.eigenvectors[best_block][:, 0]
    return PureState(a.shape, best_block, vec / np.linalg.norm(vec))


@dataclass(frozen=True)
class StateSample:
    shape: AlgebraShape
    states: tuple[PureState, ...]
    strategy: str
    seed: int

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)


def _haar_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _bloch_grid(count: int) -> list[np.ndarray]:
    # Fibonacci lattice on the sphere, mapped to qubit state vectors.
    out = []
    for i in range(count):
        cos_theta = 1.0 - 2.0 * (i + 0.5) / count
        theta = math.acos(max(-1.0, min(1.0, cos_theta)))
        phi = i * _GOLDEN_ANGLE
        out.append(
            np.array(
                [math.cos(theta / 2.0), math.sin(theta / 2.0) * np.exp(1j * phi)]
            )
        )
    return out


def eigenvector_states(a: AlgebraElement) -> list[PureState]:
    """All eigenvector states of a Hermitian element, top eigenvalue first."""
    es = hermitian_eigensystem(a)
    out = []
    for i, (lam, u) in enumerate(zip(es.eigenvalues, es.eigenvectors)):
        for j in range(lam.size):
            vec = u[:, j]
            out.append(PureState(a.shape, i, vec / np.linalg.norm(vec)))
    return out


def sample_pure_states(
    shape: AlgebraShape,
    strategy: str = "random",
    count: int = 100,
    seed: int = 0,
    elements: Sequence[AlgebraElement] = (),
) -> StateSample:
    """Deterministic sample of pure states.

    strategy "random" draws Haar-uniform unit vectors, blocks round-robin;
    "grid" uses a Bloch-sphere lattice on 2x2 blocks (deterministic Haar on
    larger blocks); "eigen-directed" leads with eigenvector states of
    ``elements`` and fills the remainder randomly.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    states: list[PureState] = []

    if strategy == "eigen-directed":
        for a in elements:
            states.extend(eigenvector_states(a))
        states = states[:count]

    if strategy == "grid":
        per_block = [count // shape.num_blocks] * shape.num_blocks
        for i in range(count % shape.num_blocks):
            per_block[i] += 1
        for i, n in enumerate(shape.block_dims):
            take = per_block[i]
            if take == 0:
                continue
            if n == 1:
                states.append(PureState(shape, i, np.array([1.0 + 0j])))
            elif n == 2:
                states.extend(PureState(shape, i, v) for v in _bloch_grid(take))
            else:
                states.extend(
                    PureState(shape, i, _haar_vector(n, rng)) for _ in range(take)
                )
    else:
        while len(states) < count:
            i = len(states) % shape.num_blocks
            n = shape.block_dims[i]
            if n == 1:
                states.append(PureState(shape, i, np.array([1.0 + 0j])))
            else:
                states.append(PureState(shape, i, _haar_vector(n, rng)))

    # one-dimensional algebras admit a single pure state; dedupe
    if shape.block_dims == (1,):
        states = states[:1]
    return StateSample(shape, tuple(states[:count]) if len(states) > count else tuple(states), strategy, seed)
