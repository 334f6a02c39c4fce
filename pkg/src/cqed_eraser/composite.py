"""Joint path x atom x cavity1 x cavity2 states and the conditional unitaries.

Amplitudes are stored as a 4-d array indexed ``[path, atom, n1, n2]``; the
flat vector used by the dense oracle is the C-order ravel of that array.
Every operation returns a new state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BasisMismatch, DimensionMismatch, NonUnitaryError, NormError, ZeroProbability
from .fock import CavityState, as_phi, number_phase_factors

ZERO_PROB = 1e-300
UNITARY_TOL = 1e-12


class Path(IntEnum):
    SLIT1 = 0
    SLIT2 = 1

    @property
    def label(self) -> str:
        return f"slit{self.value + 1}"


def as_path(path) -> Path:
    if isinstance(path, Path):
        return path
    if isinstance(path, str):
        try:
            return {"slit1": Path.SLIT1, "slit2": Path.SLIT2}[path.lower()]
        except KeyError:
            raise ValueError(f"unknown path {path!r}") from None
    if path in (1, 2):
        return Path(path - 1)
    raise ValueError(f"unknown path {path!r}")


@dataclass(frozen=True)
class AtomBasis:
    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels) or not labels:
            raise ValueError(f"atomic labels must be unique and non-empty: {labels}")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise BasisMismatch(f"level {label!r} not in basis {self.labels}") from None


TWO_LEVEL = AtomBasis(("e", "f"))
LAMBDA = AtomBasis(("a", "b", "c"))
CASCADE = AtomBasis(("f", "g"))


@dataclass(frozen=True)
class AtomState:
    basis: AtomBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != len(self.basis):
            raise DimensionMismatch(f"{amps.size} amplitudes for basis {self.basis.labels}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def level(cls, basis: AtomBasis, label: str) -> "AtomState":
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.index(label)] = 1.0
        return cls(basis, amps)

    @classmethod
    def superposition(cls, basis: AtomBasis, **amps) -> "AtomState":
        vec = np.zeros(len(basis), dtype=complex)
        for label, c in amps.items():
            vec[basis.index(label)] = c
        return cls(basis, vec)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[self.basis.index(label)])


@dataclass(frozen=True)
class RamseyRotation:
    """A 2x2 unitary on a pair of atomic levels.

    Column ``k`` of ``matrix`` is the image of ``target_levels[k]``.
    """

    matrix: np.ndarray
    target_levels: Tuple[str, str]

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("Ramsey rotation must be 2x2")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(2)))
        if dev > UNITARY_TOL:
            raise NonUnitaryError(f"rotation is not unitary (max |M^dag M - 1| = {dev:.3g})")
        if len(set(self.target_levels)) != 2:
            raise ValueError("target levels must be two distinct labels")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "target_levels", tuple(self.target_levels))

    @classmethod
    def identity(cls, levels) -> "RamseyRotation":
        return cls(np.eye(2), levels)


_S = 1 / math.sqrt(2)


def preparation_rotation(c_e: complex, c_f: complex) -> RamseyRotation:
    """First Ramsey zone of the cat preparation: |f> -> c_e|e> + c_f|f>."""
    c_e, c_f = complex(c_e), complex(c_f)
    if abs(abs(c_e) ** 2 + abs(c_f) ** 2 - 1.0) > 1e-12:
        raise NormError(f"|c_e|^2 + |c_f|^2 must equal 1, got {abs(c_e) ** 2 + abs(c_f) ** 2}")
    m = np.array([[c_f.conjugate(), c_e], [-c_e.conjugate(), c_f]])
    return RamseyRotation(m, ("e", "f"))


# |e> -> (|e> + i|f>)/sqrt2, |f> -> (i|e> + |f>)/sqrt2
CAT_R2 = RamseyRotation(_S * np.array([[1, 1j], [1j, 1]]), ("e", "f"))

# CAT_R2 with the top-right sign flipped: not unitary, kept to show why the sign matters.
SIGN_FLIPPED_CAT_R2_MATRIX = _S * np.array([[1, -1j], [1j, 1]])

# |b> -> (|b> + |c>)/sqrt2
LAMBDA_PRE_SLIT = RamseyRotation(_S * np.array([[1, -1], [1, 1]]), ("b", "c"))

# |g> -> (|f> + |g>)/sqrt2 and (|f> + |g>)/sqrt2 -> |f>, (-|f> + |g>)/sqrt2 -> |g>
CASCADE_R1 = RamseyRotation(_S * np.array([[1, 1], [-1, 1]]), ("f", "g"))
CASCADE_R2 = CASCADE_R1


@dataclass(frozen=True)
class JointState:
    basis: AtomBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 4 or amps.shape[0] != 2 or amps.shape[1] != len(self.basis):
            raise DimensionMismatch(
                f"joint amplitudes must have shape (2, {len(self.basis)}, d1, d2), got {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> Tuple[int, int]:
        return self.amplitudes.shape[2], self.amplitudes.shape[3]

    @property
    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    @property
    def weight(self) -> float:
        """Squared norm; 1 for physical states, the outcome weight after projection."""
        return float(np.vdot(self.flat, self.flat).real)

    def normalized(self) -> "JointState":
        w = self.weight
        if w < ZERO_PROB:
            raise ZeroProbability("cannot normalize an empty state")
        return JointState(self.basis, self.amplitudes / math.sqrt(w))

    def path_block(self, path) -> np.ndarray:
        return self.amplitudes[as_path(path)]

    def path_weights(self) -> Tuple[float, float]:
        w = np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2, 3))
        return float(w[0]), float(w[1])

    def level_weights(self) -> dict:
        w = np.sum(np.abs(self.amplitudes) ** 2, axis=(0, 2, 3))
        return {lab: float(w[i]) for i, lab in enumerate(self.basis.labels)}


StateLike = Union[JointState, AtomState]


def make_joint(
    path_amps: Sequence[complex],
    atom: AtomState,
    cav1: CavityState,
    cav2: CavityState,
    tol: float = 1e-12,
) -> JointState:
    p = np.asarray(path_amps, dtype=complex)
    if p.shape != (2,):
        raise DimensionMismatch("path amplitudes must be a pair")
    for name, n2 in (
        ("path", float(np.vdot(p, p).real)),
        ("atom", atom.norm2),
        ("cavity 1", cav1.norm2),
        ("cavity 2", cav2.norm2),
    ):
        if abs(n2 - 1.0) > tol:
            raise NormError(f"{name} factor has squared norm {n2!r}, expected 1")
    amps = np.einsum("p,a,i,j->paij", p, atom.amplitudes, cav1.amplitudes, cav2.amplitudes)
    return JointState(atom.basis, amps)


def _require_basis(state: JointState, basis: AtomBasis, op: str) -> None:
    if state.basis != basis:
        raise BasisMismatch(f"{op} needs atomic basis {basis.labels}, state has {state.basis.labels}")


def _cavity_axis(cavity: int) -> int:
    if cavity not in (1, 2):
        raise ValueError(f"cavity must be 1 or 2, got {cavity!r}")
    return cavity - 1


def _broadcast(diag: np.ndarray, cavity: int) -> np.ndarray:
    # shape for multiplying a (d1, d2) block along the chosen cavity index
    return diag[:, None] if cavity == 1 else diag[None, :]


def apply_dispersive_two_level(state: JointState, cavity: int, phase) -> JointState:
    """Far-detuned two-level interaction: e picks up exp(-i phi (n+1)), f picks up exp(i phi n)."""
    _require_basis(state, TWO_LEVEL, "apply_dispersive_two_level")
    _cavity_axis(cavity)
    phi = as_phi(phase)
    d = state.dims[cavity - 1]
    e_fac = np.exp(-1j * phi) * number_phase_factors(-phi, d)
    f_fac = number_phase_factors(phi, d)
    out = state.amplitudes.copy()
    out[:, 0] *= _broadcast(e_fac, cavity)
    out[:, 1] *= _broadcast(f_fac, cavity)
    return JointState(state.basis, out)


def apply_lambda_dispersive(state: JointState, cavity: int, phase, conditioned_on_path) -> JointState:
    """Lambda-atom interaction with cavity ``cavity`` on one slit's amplitude block.

    The b/c sector mixes through (exp(i phi n) +- 1)/2; the upper level a
    acquires exp(-i phi (n+1)), which reduces to -exp(i pi n) at phi = pi.
    """
    _require_basis(state, LAMBDA, "apply_lambda_dispersive")
    _cavity_axis(cavity)
    p = as_path(conditioned_on_path)
    phi = as_phi(phase)
    d = state.dims[cavity - 1]
    e = number_phase_factors(phi, d)
    plus = _broadcast(0.5 * (e + 1), cavity)
    minus = _broadcast(0.5 * (e - 1), cavity)
    a_fac = _broadcast(np.exp(-1j * phi) * number_phase_factors(-phi, d), cavity)

    out = state.amplitudes.copy()
    a, b, c = state.amplitudes[p]
    out[p, 0] = a_fac * a
    out[p, 1] = plus * b + minus * c
    out[p, 2] = minus * b + plus * c
    return JointState(state.basis, out)


def apply_cascade_effective(state: JointState, cavity: int, phase, conditioned_on_path) -> JointState:
    """Effective cascade interaction: f picks up exp(i phi n), g is untouched."""
    _require_basis(state, CASCADE, "apply_cascade_effective")
    _cavity_axis(cavity)
    p = as_path(conditioned_on_path)
    d = state.dims[cavity - 1]
    out = state.amplitudes.copy()
    out[p, 0] *= _broadcast(number_phase_factors(as_phi(phase), d), cavity)
    return JointState(state.basis, out)


def apply_ramsey(state: StateLike, rot: RamseyRotation, path=None) -> StateLike:
    """Rotate the atomic levels ``rot.target_levels``.

    For a :class:`JointState`, ``path`` restricts the rotation to one slit's
    block (a Ramsey zone sitting behind only that slit).
    """
    i, j = (state.basis.index(lab) for lab in rot.target_levels)
    m = rot.matrix
    if isinstance(state, AtomState):
        out = state.amplitudes.copy()
        x, y = state.amplitudes[i], state.amplitudes[j]
        out[i] = m[0, 0] * x + m[0, 1] * y
        out[j] = m[1, 0] * x + m[1, 1] * y
        return AtomState(state.basis, out)
    sel = slice(None) if path is None else as_path(path)
    out = state.amplitudes.copy()
    x = state.amplitudes[sel, i]
    y = state.amplitudes[sel, j]
    out[sel, i] = m[0, 0] * x + m[0, 1] * y
    out[sel, j] = m[1, 0] * x + m[1, 1] * y
    return JointState(state.basis, out)


def project_atom(state: JointState, level: str) -> JointState:
    """Unnormalized projection onto one atomic level; path and cavities untouched."""
    k = state.basis.index(level)
    out = np.zeros_like(state.amplitudes)
    out[:, k] = state.amplitudes[:, k]
    return JointState(state.basis, out)


def measure_atom(state: JointState, level: str) -> Tuple[float, JointState]:
    """Projective detection of ``level``; returns (probability, renormalized state).

    The probability is relative to the input's weight, so unnormalized
    inputs are treated as conditional states.
    """
    projected = project_atom(state, level)
    total = state.weight
    if total < ZERO_PROB:
        raise ZeroProbability("input state is empty")
    prob = projected.weight / total
    if prob < ZERO_PROB:
        raise ZeroProbability(f"level {level!r} is unpopulated; post-selection impossible")
    return prob, projected.normalized()


@dataclass(frozen=True)
class ConditionalCavity:
    state: CavityState
    weight: float
    purity: float
    fidelity: Optional[float]


def conditional_cavity_state(
    state: JointState,
    cavity: int,
    path=None,
    level: Optional[str] = None,
    reference: Optional[CavityState] = None,
) -> ConditionalCavity:
    """Cavity ``cavity`` conditioned on an optional path and atomic outcome.

    The conditional block is treated as a bipartite pure state (this cavity
    vs everything else). ``state`` is its leading Schmidt vector, ``purity``
    is Tr(rho^2) of the reduced cavity state, and ``fidelity`` is
    <ref|rho|ref> for a supplied reference.
    """
    ax = _cavity_axis(cavity)
    block = state.amplitudes
    if path is not None:
        block = block[as_path(path)][None]
    if level is not None:
        k = state.basis.index(level)
        block = block[:, k][:, None]
    # move this cavity's index to the front: (d_k, everything else)
    mat = np.moveaxis(block, 2 + ax, 0).reshape(block.shape[2 + ax], -1)
    weight = float(np.vdot(mat, mat).real)
    if weight < ZERO_PROB:
        raise ZeroProbability(f"conditional block (path={path}, level={level}) is empty")
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    s2 = s ** 2 / weight
    purity = float(np.sum(s2 ** 2))
    lead = u[:, 0]
    fid = None
    if reference is not None:
        if reference.dim != mat.shape[0]:
            raise DimensionMismatch("reference dimension differs from cavity dimension")
        proj = reference.amplitudes.conj() @ mat
        fid = float(np.vdot(proj, proj).real / (weight * reference.norm2))
        # fix the global phase against the reference
        ov = np.vdot(reference.amplitudes, lead)
        if abs(ov) > 0:
            lead = lead * (abs(ov) / ov)
    return ConditionalCavity(CavityState(lead), weight, purity, fid)


@dataclass(frozen=True)
class MarkerDecomposition:
    """state = sqrt(p1)|slit1>(x)m1 + sqrt(p2)|slit2>(x)m2."""

    m1: np.ndarray
    m2: np.ndarray
    p1: float
    p2: float

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.m1, self.m2))


def marker_states(state: JointState) -> MarkerDecomposition:
    w1, w2 = state.path_weights()
    total = w1 + w2
    if min(w1, w2) < ZERO_PROB * max(total, 1.0):
        raise ZeroProbability(f"path block empty (weights {w1:.3g}, {w2:.3g})")
    m1 = state.amplitudes[0].reshape(-1) / math.sqrt(w1)
    m2 = state.amplitudes[1].reshape(-1) / math.sqrt(w2)
    return MarkerDecomposition(m1, m2, w1 / total, w2 / total)

