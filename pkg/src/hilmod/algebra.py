"""Arithmetic and functional calculus for finite direct sums of complex matrix blocks.

An element of ``A = M_{n_1}(C) + ... + M_{n_m}(C)`` is stored as one dense
complex matrix per block.  All spectral operations (norms, square roots,
polar parts, range projections) go through a cyclic Jacobi eigensolver for
complex Hermitian matrices; singular values are obtained from the
eigenvalues of ``a* a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import NotHermitian, NotPositive, ShapeMismatch, Singular

# Relative tolerances; every spectral routine accepts an override.
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = 1e-10
RANK_TOL = 1e-8
# Eigenvalues below this band (relative to the largest) are treated as exact
# zeros before a square root, so that sqrt does not amplify round-off.
SQRT_CLIP_TOL = 1e-12

_JACOBI_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class AlgebraShape:
    """Ordered block dimensions (n_1, ..., n_m) of the coefficient algebra."""

    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise ValueError("shape needs at least one block")
        if any(n < 1 for n in dims):
            raise ValueError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dim(self) -> int:
        """Complex dimension of the algebra: sum of n_i^2."""
        return sum(n * n for n in self.block_dims)

    def block_offset(self, i: int) -> int:
        """Start of block ``i`` inside a raveled coordinate vector."""
        return sum(n * n for n in self.block_dims[:i])


class AlgebraElement:
    """A block-diagonal complex matrix; immutable."""

    __slots__ = ("shape", "blocks")

    def __init__(self, shape: AlgebraShape, blocks: Sequence[np.ndarray]):
        if len(blocks) != shape.num_blocks:
            raise ShapeMismatch(
                f"expected {shape.num_blocks} blocks, got {len(blocks)}"
            )
        mats = []
        for n, blk in zip(shape.block_dims, blocks):
            m = np.array(blk, dtype=np.complex128)
            if m.shape != (n, n):
                raise ShapeMismatch(f"block has shape {m.shape}, expected {(n, n)}")
            m.setflags(write=False)
            mats.append(m)
        self.shape = shape
        self.blocks = tuple(mats)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_blocks(blocks: Sequence[np.ndarray]) -> "AlgebraElement":
        shape = AlgebraShape(tuple(np.asarray(b).shape[0] for b in blocks))
        return AlgebraElement(shape, blocks)

    @staticmethod
    def identity(shape: AlgebraShape) -> "AlgebraElement":
        return AlgebraElement(shape, [np.eye(n) for n in shape.block_dims])

    @staticmethod
    def zero(shape: AlgebraShape) -> "AlgebraElement":
        return AlgebraElement(shape, [np.zeros((n, n)) for n in shape.block_dims])

    # -- algebra operations ------------------------------------------------

    def _check_same_shape(self, other: "AlgebraElement"):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same_shape(other)
        return AlgebraElement(
            self.shape, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same_shape(other)
        return AlgebraElement(
            self.shape, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.shape, [-a for a in self.blocks])

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check_same_shape(other)
            return AlgebraElement(
                self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)]
            )
        return AlgebraElement(self.shape, [complex(other) * a for a in self.blocks])

    def __rmul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.shape, [complex(scalar) * a for a in self.blocks])

    @property
    def star(self) -> "AlgebraElement":
        """Adjoint (conjugate transpose per block)."""
        return AlgebraElement(self.shape, [a.conj().T for a in self.blocks])

    def ravel(self) -> np.ndarray:
        """Row-major coordinates in C^dim; block-major order."""
        return np.concatenate([b.ravel() for b in self.blocks])

    @staticmethod
    def unravel(shape: AlgebraShape, vec: np.ndarray) -> "AlgebraElement":
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (shape.dim,):
            raise ShapeMismatch(f"vector length {vec.shape} vs algebra dim {shape.dim}")
        blocks, pos = [], 0
        for n in shape.block_dims:
            blocks.append(vec[pos : pos + n * n].reshape(n, n))
            pos += n * n
        return AlgebraElement(shape, blocks)

    def frobenius_norm(self) -> float:
        return math.sqrt(sum(float(np.sum(np.abs(b) ** 2)) for b in self.blocks))

    def __repr__(self) -> str:
        return f"AlgebraElement(shape={self.shape.block_dims})"


def matrix_units(shape: AlgebraShape) -> Iterator[AlgebraElement]:
    """Matrix-unit basis of A, ordered so unit s ravels to standard basis vector s."""
    for i, n in enumerate(shape.block_dims):
        for r in range(n):
            for c in range(n):
                blocks = [np.zeros((k, k)) for k in shape.block_dims]
                blocks[i][r, c] = 1.0
                yield AlgebraElement(shape, blocks)


# -- Jacobi eigensolver ----------------------------------------------------


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """2x2 unitary whose columns are eigenvectors of [[app, apq], [conj(apq), aqq]].

    The eigenvector formula is chosen per the sign of (app - aqq)/2 to avoid
    cancellation; columns are ordered so the rotation is a small perturbation
    of the identity when the pivot is small.
    """
    d = 0.5 * (app - aqq)
    r = math.hypot(abs(apq), d)
    if d >= 0:
        lam_top = 0.5 * (app + aqq) + r
        v = np.array([lam_top - aqq, np.conj(apq)], dtype=np.complex128)
        first_is_top = True
    else:
        lam_top = 0.5 * (app + aqq) + r
        v = np.array([apq, lam_top - app], dtype=np.complex128)
        first_is_top = False
    nrm = np.linalg.norm(v)
    if nrm == 0.0:  # pivot was exactly zero; caller skips this case
        return np.eye(2, dtype=np.complex128)
    v = v / nrm
    j = np.array([[v[0], -np.conj(v[1])], [v[1], np.conj(v[0])]])
    if not first_is_top:
        # keep the dominant diagonal position stable: swap columns
        j = j[:, ::-1]
    return j


def _jacobi_hermitian(h: np.ndarray, tol: float = _JACOBI_TOL):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Returns (eigenvalues ascending-unordered, unitary V) with h = V diag V*.
    """
    n = h.shape[0]
    a = np.array(h, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return np.array([a[0, 0].real]), v
    scale = np.linalg.norm(a) or 1.0
    thresh = tol * scale
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2)), 0.0))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= thresh / (n * n):
                    continue
                j = _jacobi_rotation(a[p, p].real, a[q, q].real, a[p, q])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ j
                a[idx, :] = j.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ j
    return np.diag(a).real.copy(), v


@dataclass(frozen=True)
class HermitianEigensystem:
    """Per-block unitary diagonalization; eigenvalues sorted descending."""

    shape: AlgebraShape
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> AlgebraElement:
        return AlgebraElement(
            self.shape,
            [
                (u * lam) @ u.conj().T
                for lam, u in zip(self.eigenvalues, self.eigenvectors)
            ],
        )

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement:
        """Functional calculus: apply fn to the eigenvalue arrays."""
        return AlgebraElement(
            self.shape,
            [
                (u * fn(lam)) @ u.conj().T
                for lam, u in zip(self.eigenvalues, self.eigenvectors)
            ],
        )

    def max_eigenvalue(self) -> float:
        return max(float(lam[0]) for lam in self.eigenvalues)

    def min_eigenvalue(self) -> float:
        return min(float(lam[-1]) for lam in self.eigenvalues)


def hermitian_eigensystem(a: AlgebraElement, tol: float = HERMITICITY_TOL) -> HermitianEigensystem:
    """Diagonalize a Hermitian element blockwise.

    Raises NotHermitian when ``||a - a*|| > tol * ||a||`` (Frobenius norms).
    """
    gap = (a - a.star).frobenius_norm()
    ref = a.frobenius_norm()
    if gap > tol * max(ref, 1e-300):
        raise NotHermitian(f"||a - a*|| = {gap:.3e} exceeds {tol:.1e} * ||a||")
    vals, vecs = [], []
    for blk in a.blocks:
        h = 0.5 * (blk + blk.conj().T)  # symmetrize round-off
        lam, u = _jacobi_hermitian(h)
        order = np.argsort(-lam, kind="stable")
        vals.append(lam[order])
        vecs.append(u[:, order])
    return HermitianEigensystem(a.shape, tuple(vals), tuple(vecs))


def _singular_values(a: AlgebraElement) -> list[np.ndarray]:
    """Per-block singular values (descending) via eigenvalues of a* a."""
    out = []
    for blk in a.blocks:
        gram = blk.conj().T @ blk
        lam, _ = _jacobi_hermitian(0.5 * (gram + gram.conj().T))
        lam = np.sort(np.clip(lam, 0.0, None))[::-1]
        out.append(np.sqrt(lam))
    return out


def operator_norm(a: AlgebraElement) -> float:
    """Largest singular value over all blocks.

    For Hermitian a this equals the supremum of |f(a)| over pure states f,
    attained at an eigenvector state.
    """
    return max(float(sv[0]) if sv.size else 0.0 for sv in _singular_values(a))


def is_positive(a: AlgebraElement, tol: float = POSITIVITY_TOL):
    """Check positivity; returns (flag, margin) with margin = min eigenvalue.

    margin is None when the element is not Hermitian.
    """
    gap = (a - a.star).frobenius_norm()
    ref = a.frobenius_norm()
    if gap > tol * max(ref, 1e-300):
        return False, None
    es = hermitian_eigensystem(a, tol=max(tol, 1.0))
    margin = es.min_eigenvalue()
    scale = max(abs(es.max_eigenvalue()), abs(margin), 1e-300)
    return margin >= -tol * scale, margin


def positive_sqrt(a: AlgebraElement, tol: float = POSITIVITY_TOL) -> AlgebraElement:
    """Positive square root of a positive element.

    Eigenvalues in the +/- clip band around zero are flattened to exact zeros
    first; anything below ``-tol * ||a||`` raises NotPositive.
    """
    es = hermitian_eigensystem(a, tol=tol)
    scale = max(abs(es.max_eigenvalue()), abs(es.min_eigenvalue()), 0.0)
    lo = es.min_eigenvalue()
    if lo < -tol * max(scale, 1e-300):
        raise NotPositive(f"eigenvalue {lo:.3e} below -{tol:.1e} * ||a||")
    clip = SQRT_CLIP_TOL * max(scale, 1e-300)

    def fn(lam):
        lam = np.where(np.abs(lam) <= clip, 0.0, np.clip(lam, 0.0, None))
        return np.sqrt(lam)

    return es.apply(fn)


def abs_element(a: AlgebraElement) -> AlgebraElement:
    """|a| = (a* a)^(1/2)."""
    return positive_sqrt(a.star * a)


def range_projection(a: AlgebraElement, rank_tol: float = RANK_TOL) -> AlgebraElement:
    """Smallest projection p with p a = a, for positive a.

    Rank per block counts eigenvalues above ``rank_tol * ||a||``.
    """
    es = hermitian_eigensystem(a)
    lo = es.min_eigenvalue()
    scale = max(abs(es.max_eigenvalue()), abs(lo), 1e-300)
    if lo < -POSITIVITY_TOL * scale:
        raise NotPositive(f"range projection needs a positive input, min eig {lo:.3e}")
    cut = rank_tol * max(es.max_eigenvalue(), 0.0)
    return es.apply(lambda lam: (lam > cut).astype(float))


@dataclass(frozen=True)
class PolarDecomposition:
    """a = u h with h = |a|; u unitary, or a partial isometry when a is singular.

    ``unitary`` always holds a full unitary completion of u (useful when a
    witness construction needs ||u|| = 1 with u* u = 1 even for singular a).
    """

    u: AlgebraElement
    h: AlgebraElement
    singular: bool
    unitary: AlgebraElement


def polar_decompose(a: AlgebraElement, rank_tol: float = RANK_TOL) -> PolarDecomposition:
    """Blockwise polar decomposition via the eigensystem of a* a.

    For invertible blocks u is the unitary polar factor.  Singular blocks
    yield a partial isometry whose initial projection is the range
    projection of h; the ``singular`` flag is set and a unitary completion
    is reported alongside.
    """
    u_blocks, upi_blocks, h_blocks = [], [], []
    singular = False
    for blk in a.blocks:
        n = blk.shape[0]
        gram = blk.conj().T @ blk
        lam, v = _jacobi_hermitian(0.5 * (gram + gram.conj().T))
        order = np.argsort(-lam, kind="stable")
        lam = np.clip(lam[order], 0.0, None)
        v = v[:, order]
        sv = np.sqrt(lam)
        cut = rank_tol * (sv[0] if sv.size else 0.0)
        rank = int(np.sum(sv > cut))
        h_blocks.append((v * sv) @ v.conj().T)
        u_cols = np.zeros((n, n), dtype=np.complex128)
        if rank > 0:
            u_cols[:, :rank] = (blk @ v[:, :rank]) / sv[:rank]
        if rank < n:
            singular = True
            u_full = np.concatenate([u_cols[:, :rank], _orthonormal_completion(u_cols[:, :rank], n)], axis=1)
        else:
            u_full = u_cols
        upi_blocks.append(u_cols[:, :rank] @ v[:, :rank].conj().T)
        u_blocks.append(u_full @ v.conj().T)
    h = AlgebraElement(a.shape, h_blocks)
    unitary = AlgebraElement(a.shape, u_blocks)
    u = AlgebraElement(a.shape, upi_blocks) if singular else unitary
    return PolarDecomposition(u=u, h=h, singular=singular, unitary=unitary)


def _orthonormal_completion(cols: np.ndarray, n: int) -> np.ndarray:
    """Deterministic orthonormal completion of a set of orthonormal columns."""
    have = cols.shape[1]
    need = n - have
    out = []
    basis = cols
    for j in range(n):
        if len(out) == need:
            break
        cand = np.zeros(n, dtype=np.complex128)
        cand[j] = 1.0
        cand = cand - basis @ (basis.conj().T @ cand)
        nrm = np.linalg.norm(cand)
        if nrm > 1e-7:
            cand = cand / nrm
            out.append(cand)
            basis = np.concatenate([basis, cand[:, None]], axis=1)
    return np.stack(out, axis=1)


@dataclass(frozen=True)
class InversionResult:
    inverse: AlgebraElement
    inverse_norm: float


def invert(a: AlgebraElement, tol: float = RANK_TOL) -> InversionResult:
    """Blockwise inverse; raises Singular with the offending block index."""
    svs = _singular_values(a)
    for i, sv in enumerate(svs):
        if sv[-1] <= tol * max(sv[0], 1e-300):
            raise Singular(f"block {i} is singular (sigma_min = {sv[-1]:.3e})", block_index=i)
    inv_blocks = [np.linalg.solve(blk, np.eye(blk.shape[0])) for blk in a.blocks]
    inv = AlgebraElement(a.shape, inv_blocks)
    return InversionResult(inverse=inv, inverse_norm=operator_norm(inv))


# -- random elements (seeded; used by sampling strategies and builtins) ----


def random_element(shape: AlgebraShape, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(
        shape,
        [
            rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            for n in shape.block_dims
        ],
    )


def random_hermitian(shape: AlgebraShape, rng: np.random.Generator) -> AlgebraElement:
    a = random_element(shape, rng)
    return 0.5 * (a + a.star)


def random_positive(
    shape: AlgebraShape, rng: np.random.Generator, floor: float = 0.0
) -> AlgebraElement:
    a = random_element(shape, rng)
    out = a.star * a
    if floor:
        out = out + floor * AlgebraElement.identity(shape)
    return out


# -- serialization: complex matrices as nested [re, im] pairs --------------


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(rows: list) -> np.ndarray:
    return np.array([[complex(p[0], p[1]) for p in row] for row in rows])


def element_to_json(a: AlgebraElement) -> dict:
    return {
        "shape": list(a.shape.block_dims),
        "blocks": [_matrix_to_json(b) for b in a.blocks],
    }


def element_from_json(data: dict) -> AlgebraElement:
    shape = AlgebraShape(tuple(data["shape"]))
    return AlgebraElement(shape, [_matrix_from_json(b) for b in data["blocks"]])
