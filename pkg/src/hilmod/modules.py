"""Free Hilbert modules X = A^p and their submodules.

Conventions fixed once for the whole package: the algebra-valued inner
product <x, y> = sum_k x_k* y_k is A-linear in the SECOND slot and
conjugate-A-linear in the first, and a representable functional acts by
tau(y) = <z_tau, y>.  Submodules are generator sets; their scalar shadow
(the raveled span, closed under the right A-action) drives complements,
projections and fullness checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    RANK_TOL,
    AlgebraElement,
    AlgebraShape,
    abs_element,
    element_from_json,
    element_to_json,
    hermitian_eigensystem,
    matrix_units,
    operator_norm,
    positive_sqrt,
    random_element,
)
from .errors import NotFull, NotLinear, ShapeMismatch

LINEARITY_TOL = 1e-10
SPAN_TOL = 1e-10


@dataclass(frozen=True)
class ModuleSpace:
    """The free right module A^p."""

    shape: AlgebraShape
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("module rank must be >= 1")

    @property
    def scalar_dim(self) -> int:
        return self.rank * self.shape.dim


class ModuleElement:
    """A p-tuple of algebra elements; immutable."""

    __slots__ = ("space", "components")

    def __init__(self, space: ModuleSpace, components: Sequence[AlgebraElement]):
        if len(components) != space.rank:
            raise ShapeMismatch(f"expected {space.rank} components, got {len(components)}")
        for c in components:
            if c.shape != space.shape:
                raise ShapeMismatch("component algebra shape differs from the module's")
        self.space = space
        self.components = tuple(components)

    @staticmethod
    def zero(space: ModuleSpace) -> "ModuleElement":
        return ModuleElement(space, [AlgebraElement.zero(space.shape)] * space.rank)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.space, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.space, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.space, [-a for a in self.components])

    def __mul__(self, a) -> "ModuleElement":
        """Right action x . a for algebra a, or scalar multiple."""
        if isinstance(a, AlgebraElement):
            return ModuleElement(self.space, [c * a for c in self.components])
        return ModuleElement(self.space, [complex(a) * c for c in self.components])

    def __rmul__(self, scalar) -> "ModuleElement":
        return ModuleElement(self.space, [complex(scalar) * c for c in self.components])

    def _check(self, other: "ModuleElement"):
        if self.space != other.space:
            raise ShapeMismatch(f"{self.space} vs {other.space}")

    def ravel(self) -> np.ndarray:
        return np.concatenate([c.ravel() for c in self.components])

    @staticmethod
    def unravel(space: ModuleSpace, vec: np.ndarray) -> "ModuleElement":
        vec = np.asarray(vec, dtype=np.complex128)
        if vec.shape != (space.scalar_dim,):
            raise ShapeMismatch(f"vector length {vec.shape} vs module dim {space.scalar_dim}")
        d = space.shape.dim
        return ModuleElement(
            space,
            [AlgebraElement.unravel(space.shape, vec[k * d : (k + 1) * d]) for k in range(space.rank)],
        )

    def to_json(self) -> dict:
        return {"rank": self.space.rank, "components": [element_to_json(c) for c in self.components]}

    @staticmethod
    def from_json(data: dict) -> "ModuleElement":
        comps = [element_from_json(c) for c in data["components"]]
        space = ModuleSpace(comps[0].shape, int(data["rank"]))
        return ModuleElement(space, comps)

    def __repr__(self) -> str:
        return f"ModuleElement(shape={self.space.shape.block_dims}, rank={self.space.rank})"


def standard_generator(space: ModuleSpace, k: int) -> ModuleElement:
    """e_k: unit of A in slot k, zero elsewhere."""
    comps = [AlgebraElement.zero(space.shape) for _ in range(space.rank)]
    comps[k] = AlgebraElement.identity(space.shape)
    return ModuleElement(space, comps)


def random_module_element(space: ModuleSpace, rng: np.random.Generator) -> ModuleElement:
    return ModuleElement(space, [random_element(space.shape, rng) for _ in range(space.rank)])


def inner_product(x: ModuleElement, y: ModuleElement) -> AlgebraElement:
    """<x, y> = sum_k x_k* y_k.  A-linear in y, conjugate-A-linear in x."""
    x._check(y)
    out = AlgebraElement.zero(x.space.shape)
    for a, b in zip(x.components, y.components):
        out = out + a.star * b
    return out


def abs_module(x: ModuleElement) -> AlgebraElement:
    """|x| = <x, x>^(1/2)."""
    return positive_sqrt(inner_product(x, x))


def module_norm(x: ModuleElement) -> float:
    return float(np.sqrt(operator_norm(inner_product(x, x))))


# -- dual functionals --------------------------------------------------------


class DualFunctional:
    """A bounded A-linear map X -> A, representable or black-box.

    Black-box functionals must pass :func:`probe_linearity` before any
    representation is attempted.
    """

    def __init__(
        self,
        space: ModuleSpace,
        func: Callable[[ModuleElement], AlgebraElement] | None = None,
        representer: ModuleElement | None = None,
    ):
        if (func is None) == (representer is None):
            raise ValueError("give exactly one of func or representer")
        if representer is not None and representer.space != space:
            raise ShapeMismatch("representer lives in a different module")
        self.space = space
        self._func = func
        self.representer = representer

    @staticmethod
    def from_representer(z: ModuleElement) -> "DualFunctional":
        return DualFunctional(z.space, representer=z)

    @staticmethod
    def zero(space: ModuleSpace) -> "DualFunctional":
        return DualFunctional(space, representer=ModuleElement.zero(space))

    def __call__(self, y: ModuleElement) -> AlgebraElement:
        if y.space != self.space:
            raise ShapeMismatch("functional applied outside its module")
        if self.representer is not None:
            return inner_product(self.representer, y)
        return self._func(y)


def probe_linearity(
    tau: DualFunctional,
    probes: int = 8,
    tol: float = LINEARITY_TOL,
    seed: int = 2024,
) -> None:
    """Check additivity and right-A-linearity on random probes; raise NotLinear."""
    rng = np.random.default_rng(seed)
    space = tau.space
    for _ in range(probes):
        y1 = random_module_element(space, rng)
        y2 = random_module_element(space, rng)
        b = random_element(space.shape, rng)
        scale = max(
            operator_norm(tau(y1)) + operator_norm(tau(y2)),
            1e-12,
        )
        add_gap = operator_norm(tau(y1 + y2) - (tau(y1) + tau(y2)))
        if add_gap > tol * scale:
            raise NotLinear(f"additivity gap {add_gap:.3e} above tolerance")
        mod_gap = operator_norm(tau(y1 * b) - tau(y1) * b)
        if mod_gap > tol * max(scale * operator_norm(b), 1e-12):
            raise NotLinear(f"module-linearity gap {mod_gap:.3e} above tolerance")


def represent_functional(tau: DualFunctional, tol: float = LINEARITY_TOL) -> ModuleElement:
    """Self-duality: the unique z with tau(y) = <z, y> for all y.

    Component k is tau(e_k)*; black-box inputs are linearity-probed first.
    The representation is isometric: ||z|| equals the functional norm.
    """
    if tau.representer is not None:
        return tau.representer
    probe_linearity(tau, tol=tol)
    space = tau.space
    comps = [tau(standard_generator(space, k)).star for k in range(space.rank)]
    return ModuleElement(space, comps)


def functional_norm(tau: DualFunctional, samples: int = 200, seed: int = 7) -> tuple[float, bool]:
    """(norm, exact) for a functional.

    Representable functionals give the exact value ||z||.  Black-box inputs
    get a sampled supremum of ||tau(y)|| over unit y, refined by local
    ascent; this is a lower bound and is flagged as such (exact=False).
    """
    if tau.representer is not None:
        return module_norm(tau.representer), True
    rng = np.random.default_rng(seed)
    space = tau.space
    best = 0.0
    best_y = None
    for _ in range(samples):
        y = random_module_element(space, rng)
        nrm = module_norm(y)
        if nrm < 1e-14:
            continue
        y = (1.0 / nrm) * y
        val = operator_norm(tau(y))
        if val > best:
            best, best_y = val, y
    if best_y is not None:
        for _ in range(50):  # local ascent around the best sample
            cand = best_y + 0.1 * random_module_element(space, rng)
            cand = (1.0 / module_norm(cand)) * cand
            val = operator_norm(tau(cand))
            if val > best:
                best, best_y = val, cand
    return best, False


# -- submodules --------------------------------------------------------------


def _closure_span_vectors(generators: Sequence[ModuleElement]) -> np.ndarray:
    """Columns raveling g . E over all generators g and matrix units E.

    Their span is the scalar shadow of the generated submodule (the right
    A-action closure), which is what complements and projections act on.
    """
    if not generators:
        raise ValueError("need at least one generator")
    space = generators[0].space
    cols = []
    for g in generators:
        for e in matrix_units(space.shape):
            cols.append((g * e).ravel())
    return np.stack(cols, axis=1)


def _orthonormal_basis(columns: np.ndarray, tol: float = SPAN_TOL) -> np.ndarray:
    """Orthonormal basis of the column span, rank cut relative to sigma_max."""
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    if s.size == 0 or s[0] <= 1e-300:
        return u[:, :0]
    rank = int(np.sum(s > tol * s[0]))
    return u[:, :rank]


class Submodule:
    """A closed submodule of A^p given by finitely many generators.

    The orthonormal scalar basis is computed once at construction and the
    instance is read-only afterwards.
    """

    __slots__ = ("ambient", "generators", "basis")

    def __init__(self, ambient: ModuleSpace, generators: Sequence[ModuleElement]):
        for g in generators:
            if g.space != ambient:
                raise ShapeMismatch("generator outside the ambient module")
        self.ambient = ambient
        self.generators = tuple(generators)
        if self.generators:
            basis = _orthonormal_basis(_closure_span_vectors(self.generators))
        else:
            basis = np.zeros((ambient.scalar_dim, 0), dtype=np.complex128)
        basis.setflags(write=False)
        self.basis = basis

    @property
    def scalar_dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, x: ModuleElement, tol: float = 1e-9) -> bool:
        v = x.ravel()
        resid = v - self.basis @ (self.basis.conj().T @ v)
        return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(v)))

    def basis_elements(self) -> list[ModuleElement]:
        return [ModuleElement.unravel(self.ambient, self.basis[:, j]) for j in range(self.scalar_dim)]

    def to_json(self) -> dict:
        return {"generators": [g.to_json() for g in self.generators]}

    @staticmethod
    def from_json(ambient: ModuleSpace, data: dict) -> "Submodule":
        return Submodule(ambient, [ModuleElement.from_json(g) for g in data["generators"]])


def whole_space(space: ModuleSpace) -> Submodule:
    return Submodule(space, [standard_generator(space, k) for k in range(space.rank)])


def orthogonal_complement(y: Submodule) -> Submodule:
    """Generators of Y-perp = {x : <x, v> = 0 for all v in Y}.

    The scalar orthocomplement of the A-closed span coincides with the
    module orthocomplement because the trace pairing tr(<x, v> b) sweeps b
    over the algebra exactly when v sweeps the A-closure.
    """
    n = y.ambient.scalar_dim
    q = y.basis
    # null space of q* via full SVD of q
    if q.shape[1] == 0:
        return whole_space(y.ambient)
    u, s, _ = np.linalg.svd(q, full_matrices=True)
    rank = q.shape[1]
    comp = u[:, rank:]
    gens = [ModuleElement.unravel(y.ambient, comp[:, j]) for j in range(comp.shape[1])]
    if not gens:
        gens = [ModuleElement.zero(y.ambient)]
    return Submodule(y.ambient, gens)


def project_onto(y: Submodule, x: ModuleElement) -> ModuleElement:
    """Module projection onto Y; idempotent, A-linear, inner-product self-adjoint."""
    if x.space != y.ambient:
        raise ShapeMismatch("element outside the ambient module")
    v = x.ravel()
    return ModuleElement.unravel(y.ambient, y.basis @ (y.basis.conj().T @ v))


def represent_on_submodule(y: Submodule, tau: DualFunctional) -> ModuleElement:
    """Representer INSIDE Y of a functional given on Y.

    Extends by zero across Y-perp and represents the extension; the result
    lands in Y because the extension annihilates the complement.
    """
    ext = DualFunctional(y.ambient, func=lambda x: tau(project_onto(y, x)))
    return represent_functional(ext)


# -- fullness witnesses -------------------------------------------------------


def _right_ideal_dim(elements: Sequence[AlgebraElement], shape: AlgebraShape) -> int:
    """Scalar dimension of the span of {a . E} (the right ideal generated)."""
    cols = []
    units = list(matrix_units(shape))
    for a in elements:
        for e in units:
            cols.append((a * e).ravel())
    if not cols:
        return 0
    return _orthonormal_basis(np.stack(cols, axis=1)).shape[1]


def fullness_witnesses(
    space: ModuleSpace,
    generators: Sequence[ModuleElement],
    tol: float = RANK_TOL,
) -> list[ModuleElement]:
    """Witnesses w_i with sum <w_i, w_i> = 1, scaled through s^(-1/2).

    s = sum <g_i, g_i> must have full range; otherwise the right ideal
    spanned by the pairwise inner products is proper and NotFull reports
    the missed scalar dimension.
    """
    gens = list(generators)
    if not gens:
        raise NotFull("empty generating family", missed_dimension=space.shape.dim)
    s = AlgebraElement.zero(space.shape)
    for g in gens:
        s = s + inner_product(g, g)
    es = hermitian_eigensystem(s)
    top = max(es.max_eigenvalue(), 0.0)
    if top <= 0.0 or es.min_eigenvalue() <= tol * top:
        grams = [inner_product(g, h) for g in gens for h in gens]
        span_dim = _right_ideal_dim(grams, space.shape)
        raise NotFull(
            "generating family spans a proper right ideal",
            missed_dimension=space.shape.dim - span_dim,
        )
    inv_sqrt = es.apply(lambda lam: 1.0 / np.sqrt(lam))
    return [g * inv_sqrt for g in gens]


def corner_witnesses(
    candidates: Sequence[ModuleElement],
    corner: AlgebraElement,
    rank_tol: float = RANK_TOL,
) -> list[ModuleElement]:
    """Witnesses w_i from the candidate span with sum <w_i, w_i> = corner projection.

    Used by witness construction: the candidates are complement elements,
    ``corner`` a projection 1 - p.  Returns [] when the reachable range is
    trivial; the achieved range may be a subprojection of ``corner``.
    """
    if not candidates:
        return []
    space = candidates[0].space
    # compress to the corner: closure only under corner * A * corner, so the
    # resulting inner products stay supported inside the corner projection
    cols = []
    for c in candidates:
        for e in matrix_units(space.shape):
            cols.append((c * (corner * e * corner)).ravel())
    basis = _orthonormal_basis(np.stack(cols, axis=1))
    if basis.shape[1] == 0:
        return []
    elems = [ModuleElement.unravel(space, basis[:, j]) for j in range(basis.shape[1])]
    s = AlgebraElement.zero(space.shape)
    for g in elems:
        s = s + inner_product(g, g)
    es = hermitian_eigensystem(s)
    top = max(es.max_eigenvalue(), 0.0)
    if top <= 0.0:
        return []
    cut = rank_tol * top

    def inv_sqrt_on_support(lam):
        out = np.zeros_like(lam)
        mask = lam > cut
        out[mask] = 1.0 / np.sqrt(lam[mask])
        return out

    r = es.apply(inv_sqrt_on_support)
    return [g * r for g in elems]
