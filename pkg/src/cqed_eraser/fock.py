"""Truncated Fock-space algebra for a single cavity mode.

States live in the span of |0>, ..., |dim-1>. Every constructor that
truncates an infinite expansion checks the discarded Poisson weight against
a tolerance and raises :class:`TruncationError` rather than silently
returning a corrupted state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateCat, DimensionMismatch, TruncationError

DEFAULT_DIM = 64
TRUNC_TOL = 1e-12
NORM_TOL = 1e-12

_QUARTER_TURNS = np.array([1, 1j, -1, -1j], dtype=complex)


def check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 1:
        raise DimensionMismatch(f"Fock dimension must be a positive integer, got {dim!r}")
    return int(dim)


@dataclass(frozen=True)
class CavityState:
    """Amplitudes of one cavity mode over the truncated number basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 1:
            raise DimensionMismatch("empty cavity state")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_physical(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm2 - 1.0) <= tol

    def normalized(self) -> "CavityState":
        n2 = self.norm2
        if n2 == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return CavityState(self.amplitudes / math.sqrt(n2))

    def __neg__(self) -> "CavityState":
        return CavityState(-self.amplitudes)


@dataclass(frozen=True)
class CatSpec:
    alpha: complex
    parity: str = "even"

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def sign(self) -> int:
        return 1 if self.parity == "even" else -1


@dataclass(frozen=True)
class PhaseDerivation:
    """Microscopic origin of a dispersive phase.

    The level and mode frequencies only enter through ``delta``; they are
    kept for annotation.
    """

    g: float
    tau: float
    delta: float
    scheme: str = "two_level"
    frequencies: dict = field(default_factory=dict)

    def phi(self) -> float:
        if self.scheme == "two_level":
            factor = 1.0
        elif self.scheme == "lambda":
            factor = 2.0
        else:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        return factor * self.g ** 2 * self.tau / self.delta


@dataclass(frozen=True)
class InteractionPhase:
    phi: float
    derivation: Optional[PhaseDerivation] = None

    def __post_init__(self):
        object.__setattr__(self, "phi", float(self.phi))
        if self.derivation is not None:
            expected = self.derivation.phi()
            if not math.isclose(self.phi, expected, rel_tol=1e-12, abs_tol=1e-15):
                raise ValueError(
                    f"phi={self.phi} inconsistent with derivation value {expected}"
                )

    @classmethod
    def from_coupling(cls, g, tau, delta, scheme="two_level", **frequencies):
        d = PhaseDerivation(g, tau, delta, scheme, dict(frequencies))
        return cls(d.phi(), d)


def as_phi(phase) -> float:
    return phase.phi if isinstance(phase, InteractionPhase) else float(phase)


def number_phase_factors(theta: float, dim: int) -> np.ndarray:
    """Diagonal of exp(i*theta*a^dag a) on the first ``dim`` levels.

    Multiples of pi/2 are evaluated as exact powers of i so that the parity
    projectors built from them produce exact zeros.
    """
    n = np.arange(dim)
    quarter = theta / (math.pi / 2)
    k = round(quarter)
    if abs(quarter - k) < 1e-13:
        return _QUARTER_TURNS[(k * n) % 4]
    return np.exp(1j * theta * n)


def _log_factorials(dim: int) -> np.ndarray:
    out = np.zeros(dim)
    if dim > 1:
        out[1:] = np.cumsum(np.log(np.arange(1, dim)))
    return out


def tail_mass(alpha: complex, dim: int) -> float:
    """Poisson weight of |alpha> on levels n >= dim, summed directly."""
    dim = check_dim(dim)
    x = abs(alpha) ** 2
    if x == 0.0:
        return 0.0
    log_x = math.log(x)
    log_fact = math.lgamma(dim + 1)
    terms = []
    biggest = 0.0
    n = dim
    while True:
        t = math.exp(-x + n * log_x - log_fact)
        terms.append(t)
        biggest = max(biggest, t)
        # terms decrease once n exceeds the mean
        if n > x and t <= 1e-20 * biggest:
            break
        n += 1
        log_fact += math.log(n)
    return min(1.0, math.fsum(terms))


def _check_truncation(alpha: complex, dim: int, tol: float) -> None:
    tail = tail_mass(alpha, dim)
    if tail > tol:
        raise TruncationError(
            f"dim={dim} discards Poisson weight {tail:.3e} > {tol:.1e} for |alpha|={abs(alpha):.4g}"
        )


def _coherent_raw(alpha: complex, dim: int) -> np.ndarray:
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return amps
    n = np.arange(dim)
    r = abs(alpha)
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * _log_factorials(dim)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(alpha: complex, dim: int = DEFAULT_DIM, trunc_tol: float = TRUNC_TOL) -> CavityState:
    alpha = complex(alpha)
    dim = check_dim(dim)
    _check_truncation(alpha, dim, trunc_tol)
    amps = _coherent_raw(alpha, dim)
    return CavityState(amps / np.linalg.norm(amps))


def cat_normalization(alpha: complex, parity: str = "even") -> float:
    """Analytic prefactor 1/sqrt(2(1 +- exp(-2|alpha|^2))) of the untruncated cat."""
    sign = CatSpec(alpha, parity).sign
    return 1.0 / math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2)))


def cat_state(spec: CatSpec, dim: int = DEFAULT_DIM, trunc_tol: float = TRUNC_TOL) -> CavityState:
    """Normalized |alpha> + |-alpha> (even) or |alpha> - |-alpha> (odd)."""
    dim = check_dim(dim)
    if spec.parity == "odd" and spec.alpha == 0:
        raise DegenerateCat("odd cat state with alpha = 0 is the zero vector")
    _check_truncation(spec.alpha, dim, trunc_tol)
    raw = _coherent_raw(spec.alpha, dim)
    # (-alpha)^n = (-1)^n alpha^n, so the opposite-parity entries cancel exactly
    n = np.arange(dim)
    keep = (n % 2 == 0) if spec.sign > 0 else (n % 2 == 1)
    amps = np.where(keep, 2.0 * raw, 0.0)
    return CavityState(amps / np.linalg.norm(amps))


def apply_number_phase(state: CavityState, theta: float) -> CavityState:
    return CavityState(state.amplitudes * number_phase_factors(theta, state.dim))


def parity_projector_apply(state: CavityState, sign) -> CavityState:
    """Apply (exp(i*pi*a^dag a) +- 1)/2. Result is left unnormalized.

    The '+' branch keeps even levels; the '-' branch zeroes even levels and
    flips the sign of odd ones.
    """
    if sign in ("+", 1, "even"):
        plus = True
    elif sign in ("-", -1, "odd"):
        plus = False
    else:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    n = np.arange(state.dim)
    odd = n % 2 == 1
    amps = state.amplitudes
    if plus:
        return CavityState(np.where(odd, 0.0, amps))
    return CavityState(np.where(odd, -amps, 0.0))


def inner_product(a: CavityState, b: CavityState) -> complex:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: CavityState, b: CavityState) -> float:
    """|<a|b>|^2 / (<a|a><b|b>); zero if either vector vanishes."""
    na, nb = a.norm2, b.norm2
    if na == 0.0 or nb == 0.0:
        return 0.0
    return abs(inner_product(a, b)) ** 2 / (na * nb)


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Closed form <alpha|beta> for untruncated coherent states."""
    alpha, beta = complex(alpha), complex(beta)
    return complex(np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * abs(beta) ** 2 + alpha.conjugate() * beta))
