"""Localization of a module at a pure state.

For a pure state f the semi-inner product (x, y)_f = f(<y, x>) (linear in
the first argument) has null space N_f; the quotient X / N_f is already a
Hilbert space in finite dimensions, so no completion step appears.  Coset
representatives are chosen by pivoted-Cholesky selection on the flattened
semi-definite form, which is deterministic for a fixed input.

Slot conventions, fixed package-wide and verified by the identity checks
below:

* module inner products are A-linear in the second slot,
* a representable functional acts by tau(y) = <z_tau, y>,
* the pairing between functionals is <tau, rho> := <z_rho, z_tau>.

With these choices the three localization identities hold verbatim: the
pairing identity (x + N_f, tau_f)_f = f(tau(x)), the evaluation identity
<x-hat, tau> = tau(x), and the localized-product identity f(<tau, rho>) =
(tau_f, rho_f)_f.  The price is that the hat embedding is conjugate-linear
against the pairing: <x-hat, y-hat> = <y, x>, not <x, y>.  No argument
swap is needed in any of the three identities once the pairing is defined
this way; defining the pairing as <z_tau, z_rho> instead would force a swap
in the localized-product identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .algebra import RANK_TOL, AlgebraElement
from .errors import ShapeMismatch
from .modules import (
    DualFunctional,
    ModuleElement,
    ModuleSpace,
    inner_product,
    matrix_units,
    represent_functional,
    standard_generator,
)
from .states import PureState, evaluate

logger = logging.getLogger(__name__)

SLOT_CONVENTION_NOTE = (
    "slot convention: inner products A-linear in the second slot, "
    "tau(y) = <z_tau, y>, functional pairing <tau, rho> = <z_rho, z_tau>; "
    "all three localization identities hold without argument swaps, and the "
    "hat embedding is conjugate-linear against the pairing."
)

_note_emitted = False


def _emit_convention_note():
    global _note_emitted
    if not _note_emitted:
        logger.info(SLOT_CONVENTION_NOTE)
        _note_emitted = True


@dataclass(frozen=True)
class LocalizedSpace:
    """X / N_f with a chosen coset-representative basis and its Gram matrix."""

    source: ModuleSpace
    state: PureState
    basis: tuple[ModuleElement, ...]
    gram: np.ndarray  # gram[j][k] = f(<basis_k, basis_j>)

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class LocalizedVector:
    space: LocalizedSpace
    coordinates: np.ndarray

    def norm(self) -> float:
        g = self.space.gram
        c = self.coordinates
        val = float(np.real(c.conj() @ g @ c))
        return float(np.sqrt(max(val, 0.0)))


def pairing(v: LocalizedVector, w: LocalizedVector) -> complex:
    """(v, w)_f, linear in v and conjugate-linear in w."""
    if v.space is not w.space and v.space != w.space:
        raise ShapeMismatch("localized vectors from different spaces")
    g = v.space.gram
    return complex(v.coordinates @ g.T @ w.coordinates.conj())


def _phi_matrix(space: ModuleSpace, f: PureState) -> np.ndarray:
    """Explicit quotient map on scalar coordinates: columns are Phi(unit_s)."""
    b = f.block_index
    cols = []
    for k in range(space.rank):
        base = standard_generator(space, k)
        for e in matrix_units(space.shape):
            u = base * e
            cols.append(np.concatenate([(c.blocks[b] @ f.vector) for c in u.components]))
    return np.stack(cols, axis=1)


def _phi_of(x: ModuleElement, f: PureState) -> np.ndarray:
    b = f.block_index
    return np.concatenate([(c.blocks[b] @ f.vector) for c in x.components])


def _pivoted_cholesky_indices(m: np.ndarray, rank_tol: float) -> list[int]:
    """Greedy pivot selection on a PSD matrix; returns chosen indices."""
    n = m.shape[0]
    residual = np.real(np.diag(m)).copy()
    approx = np.zeros((n, 0), dtype=np.complex128)
    chosen: list[int] = []
    scale = float(residual.max(initial=0.0))
    if scale <= 0.0:
        return chosen
    for _ in range(n):
        j = int(np.argmax(residual))
        if residual[j] <= rank_tol * scale:
            break
        col = m[:, j] - approx @ approx[j].conj()
        piv = np.sqrt(max(residual[j], 1e-300))
        lcol = (col / piv)[:, None]
        approx = np.concatenate([approx, lcol], axis=1)
        residual = residual - np.abs(lcol[:, 0]) ** 2
        residual[j] = 0.0
        chosen.append(j)
    return chosen


def localize_space(x_space: ModuleSpace, f: PureState, rank_tol: float = RANK_TOL) -> LocalizedSpace:
    """Quotient X / N_f with deterministic coset representatives.

    N_f is the kernel of the flattened semi-inner product; the selected
    scalar units span a complement of it.
    """
    if x_space.shape != f.shape:
        raise ShapeMismatch("state shape differs from the module's")
    _emit_convention_note()
    phi = _phi_matrix(x_space, f)
    # m[s, t] = (u_s, u_t)_f = f(<u_t, u_s>) = phi_t^H phi_s
    m = (phi.conj().T @ phi).T
    idx = _pivoted_cholesky_indices(m, rank_tol)
    basis = []
    all_units = list(matrix_units(x_space.shape))
    d = x_space.shape.dim
    for j in idx:
        k, s = divmod(j, d)
        basis.append(standard_generator(x_space, k) * all_units[s])
    gram = np.array([[ _pair_f(bj, bk, f) for bk in basis] for bj in basis])
    gram.setflags(write=False)
    return LocalizedSpace(source=x_space, state=f, basis=tuple(basis), gram=gram)


def _pair_f(x: ModuleElement, y: ModuleElement, f: PureState) -> complex:
    """(x, y)_f = f(<y, x>)."""
    return evaluate(f, inner_product(y, x))


def localize_vector(space: LocalizedSpace, x: ModuleElement) -> LocalizedVector:
    """Coset map x -> x + N_f in the chosen basis (linear, kernel N_f)."""
    if x.space != space.source:
        raise ShapeMismatch("element outside the localized module")
    rhs = np.array([_pair_f(x, bj, f := space.state) for bj in space.basis])
    if space.dim == 0:
        return LocalizedVector(space, np.zeros(0, dtype=np.complex128))
    # (x, b_j)_f = sum_k c_k (b_k, b_j)_f  =>  gram^T c = rhs
    coords = np.linalg.solve(space.gram.T, rhs)
    return LocalizedVector(space, coords)


def localize_functional(space: LocalizedSpace, tau: DualFunctional) -> LocalizedVector:
    """The unique tau_f with (x + N_f, tau_f)_f = f(tau(x)) for all x.

    Solved through the Gram system; for representable tau this equals the
    coset of the representer, and the norm satisfies ||tau_f|| <= ||tau||.
    """
    f = space.state
    rho = np.array([evaluate(f, tau(bj)) for bj in space.basis])
    if space.dim == 0:
        return LocalizedVector(space, np.zeros(0, dtype=np.complex128))
    # (b_j, tau_f)_f = (gram @ conj(d))_j = rho_j
    d = np.conj(np.linalg.solve(space.gram, rho))
    return LocalizedVector(space, d)


def dual_pairing(tau: DualFunctional, rho: DualFunctional) -> AlgebraElement:
    """<tau, rho> = <z_rho, z_tau>, the conjugate-extending pairing on X'."""
    return inner_product(represent_functional(rho), represent_functional(tau))
