"""Detection-screen patterns, fringe visibility and which-path distinguishability.

Each slit contributes a far-field point-source amplitude under one shared
Gaussian envelope::

    psi_j(x) = (2 pi s^2)^(-1/4) exp(-x^2 / (4 s^2)) exp(i k zeta_j x / L)

so |psi_j|^2 is a unit-mass Gaussian and the cross term is a pure cosine
of period 2 pi L / (k |zeta_1 - zeta_2|).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .composite import ZERO_PROB, JointState, MarkerDecomposition, Path, as_path
from .errors import GridTooCoarse, ZeroProbability

MIN_SAMPLES_PER_PERIOD = 8


@dataclass(frozen=True)
class ScreenModel:
    zeta1: float = 5.0
    zeta2: float = -5.0
    L: float = 1.0
    k: float = 1.0
    sigma_env: float = 1.0
    grid: np.ndarray = field(default_factory=lambda: np.linspace(-3.0, 3.0, 1024))

    def __post_init__(self):
        if self.zeta1 == self.zeta2:
            raise ValueError("slit positions must differ")
        if self.L <= 0 or self.k <= 0 or self.sigma_env <= 0:
            raise ValueError("L, k and sigma_env must be positive")
        grid = np.array(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be a strictly increasing 1-d array with >= 2 points")
        if np.max(np.diff(grid)) > self.period / 2:
            raise GridTooCoarse(
                f"grid spacing {np.max(np.diff(grid)):.4g} exceeds half the fringe period {self.period:.4g}"
            )
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def fringe_wavenumber(self) -> float:
        """q such that psi_1^* psi_2 = |E|^2 exp(i q x)."""
        return self.k * (self.zeta2 - self.zeta1) / self.L

    @property
    def period(self) -> float:
        return 2 * math.pi * self.L / (self.k * abs(self.zeta1 - self.zeta2))

    @classmethod
    def default(
        cls,
        n_points: int = 1024,
        half_width: float = 3.0,
        separation: float = 10.0,
        L: float = 1.0,
        k: float = 1.0,
        sigma_env: float = 1.0,
    ) -> "ScreenModel":
        """Symmetric slits at +-separation/2 and a grid over +-half_width envelope widths."""
        grid = np.linspace(-half_width * sigma_env, half_width * sigma_env, n_points)
        return cls(separation / 2, -separation / 2, L, k, sigma_env, grid)


def envelope(model: ScreenModel, x) -> np.ndarray:
    s = model.sigma_env
    return (2 * math.pi * s * s) ** -0.25 * np.exp(-np.asarray(x, dtype=float) ** 2 / (4 * s * s))


def slit_amplitude(model: ScreenModel, slit, x) -> np.ndarray:
    zeta = model.zeta1 if as_path(slit) is Path.SLIT1 else model.zeta2
    x = np.asarray(x, dtype=float)
    return envelope(model, x) * np.exp(1j * model.k * zeta * x / model.L)


def _coherence(state) -> Tuple[float, float, complex]:
    """(w1, w2, <A1|A2>) for the two path blocks A1, A2 of ``state``."""
    if isinstance(state, MarkerDecomposition):
        return state.p1, state.p2, math.sqrt(state.p1 * state.p2) * state.overlap
    a1 = state.amplitudes[0].reshape(-1)
    a2 = state.amplitudes[1].reshape(-1)
    return float(np.vdot(a1, a1).real), float(np.vdot(a2, a2).real), complex(np.vdot(a1, a2))


def _intensity(model: ScreenModel, x, w1, w2, cross) -> np.ndarray:
    psi1 = slit_amplitude(model, Path.SLIT1, x)
    psi2 = slit_amplitude(model, Path.SLIT2, x)
    return (
        w1 * np.abs(psi1) ** 2
        + w2 * np.abs(psi2) ** 2
        + 2 * np.real(cross * np.conj(psi1) * psi2)
    )


@dataclass(frozen=True)
class IntensityPattern:
    x: np.ndarray
    intensity: np.ndarray
    model: ScreenModel
    metadata: dict = field(default_factory=dict)

    def envelope_normalized(self) -> np.ndarray:
        return self.intensity / envelope(self.model, self.x) ** 2

    def at(self, x) -> np.ndarray:
        """Evaluate the same pattern off-grid."""
        return _intensity(self.model, x, *self.metadata["coherence"])


def intensity_pattern(
    state: Union[JointState, MarkerDecomposition],
    model: ScreenModel,
    x: Optional[np.ndarray] = None,
) -> IntensityPattern:
    """I(x) = w1|psi1|^2 + w2|psi2|^2 + 2 Re{<A1|A2> psi1^* psi2}.

    Unnormalized (projected) joint states give the pattern weighted by the
    outcome probability, so conditional patterns over all outcomes sum to
    the unconditioned one.
    """
    xs = model.grid if x is None else np.asarray(x, dtype=float)
    w1, w2, cross = _coherence(state)
    inten = _intensity(model, xs, w1, w2, cross)
    meta = {
        "coherence": (w1, w2, cross),
        "visibility_analytic": _visibility(w1, w2, cross),
        "cross_term_sign": _sign(w1, w2, cross),
    }
    pattern = IntensityPattern(xs, inten, model, meta)
    try:
        meta["visibility_empirical"] = visibility_empirical(pattern)
    except GridTooCoarse:
        meta["visibility_empirical"] = None
    return pattern


def _visibility(w1, w2, cross) -> float:
    total = w1 + w2
    if total <= 0:
        return 0.0
    return 2 * abs(cross) / total


def _sign(w1, w2, cross, tol: float = 1e-10) -> int:
    total = w1 + w2
    if total <= 0:
        return 0
    re = cross.real / total
    if abs(re) <= tol:
        return 0
    return 1 if re > 0 else -1


def _require_both_paths(w1, w2):
    if min(w1, w2) < ZERO_PROB * max(w1 + w2, 1.0):
        raise ZeroProbability(f"path block empty (weights {w1:.3g}, {w2:.3g})")


def visibility_analytic(state, strict: bool = True) -> float:
    """V = 2 sqrt(p1 p2) |<m1|m2>| / (p1 + p2).

    With ``strict`` a state confined to one slit raises ZeroProbability;
    otherwise it yields V = 0.
    """
    w1, w2, cross = _coherence(state)
    if strict:
        _require_both_paths(w1, w2)
    return _visibility(w1, w2, cross)


def cross_term_sign(state) -> int:
    """Sign of the interference term at x = 0: +1 fringe maximum, -1 minimum, 0 none."""
    return _sign(*_coherence(state))


def visibility_empirical(pattern: IntensityPattern) -> float:
    """Fringe contrast read off the envelope-normalized samples in the central period.

    The normalized pattern is an offset cosine of known wavenumber, so the
    samples are least-squares fitted to A + B cos(qx) + C sin(qx) and the
    extrema of the fit give Imax = A + R, Imin = A - R.
    """
    model = pattern.model
    half = model.period / 2
    x = pattern.x
    if x[0] > -half or x[-1] < half:
        raise GridTooCoarse(f"grid does not cover the central period [-{half:.4g}, {half:.4g}]")
    sel = np.abs(x) <= half
    if np.count_nonzero(sel) < MIN_SAMPLES_PER_PERIOD:
        raise GridTooCoarse(
            f"{np.count_nonzero(sel)} samples in the central period, need {MIN_SAMPLES_PER_PERIOD}"
        )
    xs = x[sel]
    y = pattern.intensity[sel] / envelope(model, xs) ** 2
    q = model.fringe_wavenumber
    design = np.column_stack([np.ones_like(xs), np.cos(q * xs), np.sin(q * xs)])
    (a, b, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    r = math.hypot(b, c)
    i_max, i_min = a + r, a - r
    if i_max + i_min <= 0:
        return 0.0
    return float((i_max - i_min) / (i_max + i_min))


def _path_columns(state) -> np.ndarray:
    if isinstance(state, MarkerDecomposition):
        return np.column_stack([math.sqrt(state.p1) * state.m1, math.sqrt(state.p2) * state.m2])
    return np.column_stack([state.amplitudes[0].reshape(-1), state.amplitudes[1].reshape(-1)])


def distinguishability(state, strict: bool = True) -> float:
    """Which-path distinguishability: trace norm of p1|m1><m1| - p2|m2><m2|.

    For pure markers the two nonzero eigenvalues give
    D = sqrt((w1 - w2)^2 + 4 det G) / (w1 + w2), with G the Gram matrix of
    the path blocks. det G is taken from a QR factorization of the blocks
    rather than from w1 w2 - |<A1|A2>|^2, which keeps D accurate near full
    visibility and independent of the cross term used for V.
    """
    cols = _path_columns(state)
    if cols.shape[0] < 2:
        # a one-dimensional marker space still needs a 2x2 R factor
        cols = np.vstack([cols, np.zeros((2 - cols.shape[0], 2), dtype=cols.dtype)])
    r = np.linalg.qr(cols, mode="r")
    w1 = abs(r[0, 0]) ** 2
    w2 = abs(r[0, 1]) ** 2 + abs(r[1, 1]) ** 2
    if strict:
        _require_both_paths(w1, w2)
    total = w1 + w2
    if total <= 0:
        raise ZeroProbability("empty state")
    det_gram = abs(r[0, 0] * r[1, 1]) ** 2
    return float(math.sqrt((w1 - w2) ** 2 + 4 * det_gram) / total)
