"""Dense-matrix reference construction of every conditional unitary.

Operators are assembled from the ladder operators and ``scipy.linalg.expm``
with explicit Kronecker products in (path, atom, n1, n2) order, sharing no
code with the structured kernels in :mod:`cqed_eraser.composite`. Only
practical for small dimensions (the full matrix is 2*|atom|*d1*d2 square).
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from . import composite as cp
from .composite import CASCADE, LAMBDA, TWO_LEVEL, AtomBasis, JointState, RamseyRotation, as_path


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    a = annihilation(dim)
    return a.conj().T @ a


def _ket_bra(i: int, j: int, n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def _embed(atom_cavity_terms, basis: AtomBasis, dims, cavity: int, path=None) -> np.ndarray:
    """Build the full operator from {(atom_i, atom_j): cavity_op} terms.

    Atom levels with no diagonal term get the identity. If ``path`` is set
    the operator acts only on that slit's block.
    """
    na = len(basis)
    d1, d2 = dims
    dk = dims[cavity - 1]
    terms = dict(atom_cavity_terms)
    for i in range(na):
        terms.setdefault((i, i), np.eye(dk))
    local = np.zeros((na * d1 * d2,) * 2, dtype=complex)
    for (i, j), op in terms.items():
        if cavity == 1:
            cav = np.kron(op, np.eye(d2))
        else:
            cav = np.kron(np.eye(d1), op)
        local += np.kron(_ket_bra(i, j, na), cav)
    if path is None:
        return np.kron(np.eye(2), local)
    p = as_path(path)
    sel = _ket_bra(p, p, 2)
    other = np.eye(2) - sel
    return np.kron(sel, local) + np.kron(other, np.eye(local.shape[0]))


def dense_two_level(dims, cavity: int, phi: float) -> np.ndarray:
    n = number_operator(dims[cavity - 1])
    eye = np.eye(n.shape[0])
    terms = {
        (0, 0): expm(-1j * phi * (n + eye)),
        (1, 1): expm(1j * phi * n),
    }
    return _embed(terms, TWO_LEVEL, dims, cavity)


def dense_lambda(dims, cavity: int, phi: float, path) -> np.ndarray:
    n = number_operator(dims[cavity - 1])
    eye = np.eye(n.shape[0])
    u = expm(1j * phi * n)
    terms = {
        (0, 0): expm(-1j * phi * (n + eye)),
        (1, 1): 0.5 * (u + eye),
        (1, 2): 0.5 * (u - eye),
        (2, 1): 0.5 * (u - eye),
        (2, 2): 0.5 * (u + eye),
    }
    return _embed(terms, LAMBDA, dims, cavity, path)


def dense_cascade(dims, cavity: int, phi: float, path) -> np.ndarray:
    n = number_operator(dims[cavity - 1])
    terms = {(0, 0): expm(1j * phi * n)}
    return _embed(terms, CASCADE, dims, cavity, path)


def dense_ramsey(basis: AtomBasis, dims, rot: RamseyRotation, path=None) -> np.ndarray:
    na = len(basis)
    i, j = (basis.index(lab) for lab in rot.target_levels)
    atom = np.eye(na, dtype=complex)
    idx = [i, j]
    atom[np.ix_(idx, idx)] = rot.matrix
    local = np.kron(atom, np.eye(dims[0] * dims[1]))
    if path is None:
        return np.kron(np.eye(2), local)
    p = as_path(path)
    sel = _ket_bra(p, p, 2)
    return np.kron(sel, local) + np.kron(np.eye(2) - sel, np.eye(local.shape[0]))


def dense_projector(basis: AtomBasis, dims, level: str) -> np.ndarray:
    k = basis.index(level)
    return np.kron(np.eye(2), np.kron(_ket_bra(k, k, len(basis)), np.eye(dims[0] * dims[1])))


def apply_dense(op: np.ndarray, state: JointState) -> JointState:
    return JointState(state.basis, (op @ state.flat).reshape(state.amplitudes.shape))


def _random_state(rng, basis: AtomBasis, dims) -> JointState:
    shape = (2, len(basis)) + tuple(dims)
    amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return JointState(basis, amps / np.linalg.norm(amps))


def _random_phi(rng) -> float:
    # exercise the exact quarter-turn path as well as generic angles
    if rng.random() < 0.3:
        return float(rng.integers(-4, 5)) * np.pi / 2
    return float(rng.uniform(-2 * np.pi, 2 * np.pi))


def random_comparison(rng, max_dim: int):
    """One randomized structured-vs-dense comparison; returns (name, max |difference|)."""
    dims = (int(rng.integers(1, max_dim + 1)), int(rng.integers(1, max_dim + 1)))
    cavity = int(rng.integers(1, 3))
    path = int(rng.integers(1, 3))
    phi = _random_phi(rng)
    kind = rng.choice(["two_level", "lambda", "cascade", "ramsey", "ramsey_branch"])
    if kind == "two_level":
        s = _random_state(rng, TWO_LEVEL, dims)
        fast = cp.apply_dispersive_two_level(s, cavity, phi)
        slow = apply_dense(dense_two_level(dims, cavity, phi), s)
    elif kind == "lambda":
        s = _random_state(rng, LAMBDA, dims)
        fast = cp.apply_lambda_dispersive(s, cavity, phi, path)
        slow = apply_dense(dense_lambda(dims, cavity, phi, path), s)
    elif kind == "cascade":
        s = _random_state(rng, CASCADE, dims)
        fast = cp.apply_cascade_effective(s, cavity, phi, path)
        slow = apply_dense(dense_cascade(dims, cavity, phi, path), s)
    else:
        basis, rot = [
            (TWO_LEVEL, cp.CAT_R2),
            (LAMBDA, cp.LAMBDA_PRE_SLIT),
            (CASCADE, cp.CASCADE_R1),
        ][int(rng.integers(0, 3))]
        s = _random_state(rng, basis, dims)
        where = path if kind == "ramsey_branch" else None
        fast = cp.apply_ramsey(s, rot, path=where)
        slow = apply_dense(dense_ramsey(basis, dims, rot, where), s)
    return str(kind), float(np.max(np.abs(fast.amplitudes - slow.amplitudes)))


def run_oracle_check(max_dim: int = 12, trials: int = 100, seed: int = 0):
    """List of (kind, deviation) for ``trials`` random configurations."""
    rng = np.random.default_rng(seed)
    return [random_comparison(rng, max_dim) for _ in range(trials)]
