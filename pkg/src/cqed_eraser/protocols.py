"""End-to-end experiment pipelines built from the fock and composite primitives."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import composite as cp
from .composite import CASCADE, LAMBDA, TWO_LEVEL, AtomState, JointState, Path
from .errors import ConfigError, DegenerateCat, ZeroProbability
from .fock import (
    DEFAULT_DIM,
    TRUNC_TOL,
    CatSpec,
    CavityState,
    cat_state,
    check_dim,
    coherent_state,
    tail_mass,
)

# relative weight below which an outcome branch is considered absent
BRANCH_TOL = 1e-24


@dataclass(frozen=True)
class CatPrepConfig:
    alpha: complex = 2.0
    c_e: complex = 1 / math.sqrt(2)
    c_f: complex = 1 / math.sqrt(2)
    detect: str = "f"
    dim: int = DEFAULT_DIM
    initial_cavity: Optional[complex] = None
    phase: float = math.pi / 2
    trunc_tol: float = TRUNC_TOL

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        check_dim(self.dim)
        if self.detect not in TWO_LEVEL.labels:
            raise ConfigError(f"detect must be one of {TWO_LEVEL.labels}, got {self.detect!r}")
        norm = abs(self.c_e) ** 2 + abs(self.c_f) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ConfigError(f"|c_e|^2 + |c_f|^2 = {norm}, expected 1")

    @property
    def cavity_amplitude(self) -> complex:
        return 1j * self.alpha if self.initial_cavity is None else complex(self.initial_cavity)


@dataclass(frozen=True)
class WhichPathConfig:
    """Double-slit run with one cavity behind each slit.

    ``r2_scope`` selects how the cascade read-out zone is modelled:
    ``"shared"`` rotates the atom on both beams after the cavities,
    ``"branch"`` rotates only the beam behind the cavity named by
    ``r2_position``.
    """

    alpha1: complex = 2.0
    alpha2: complex = 2.0
    scheme: str = "lambda"
    ramsey_before_slits: bool = False
    r2_position: str = "none"
    r2_scope: str = "shared"
    condition_on: Optional[str] = None
    dims: Tuple[int, int] = (DEFAULT_DIM, DEFAULT_DIM)
    phase: float = math.pi
    trunc_tol: float = TRUNC_TOL

    def __post_init__(self):
        object.__setattr__(self, "alpha1", complex(self.alpha1))
        object.__setattr__(self, "alpha2", complex(self.alpha2))
        object.__setattr__(self, "dims", tuple(check_dim(d) for d in self.dims))
        if self.scheme not in ("lambda", "cascade"):
            raise ConfigError(f"scheme must be 'lambda' or 'cascade', got {self.scheme!r}")
        if self.r2_position not in ("none", "after_C1", "after_C2"):
            raise ConfigError(f"r2_position must be none/after_C1/after_C2, got {self.r2_position!r}")
        if self.r2_scope not in ("shared", "branch"):
            raise ConfigError(f"r2_scope must be 'shared' or 'branch', got {self.r2_scope!r}")
        if self.r2_position != "none":
            if self.scheme != "cascade":
                raise ConfigError("r2_position is only meaningful for the cascade scheme")
            if not self.ramsey_before_slits:
                raise ConfigError("an R2 read-out requires the R1 superposition before the slits")
        if self.condition_on is not None and self.condition_on not in self.basis.labels:
            raise ConfigError(f"condition_on={self.condition_on!r} not in basis {self.basis.labels}")

    @property
    def basis(self) -> cp.AtomBasis:
        return LAMBDA if self.scheme == "lambda" else CASCADE


@dataclass
class ProtocolReport:
    protocol: str
    outcome_probabilities: Dict[str, float]
    final_joint: JointState
    branches: Dict[str, JointState]
    cavity_fidelities: Dict[str, float]
    cavity_purities: Dict[str, float] = field(default_factory=dict)
    pre_selection: Optional[JointState] = None
    condition_on: Optional[str] = None
    truncation_tail: Dict[str, float] = field(default_factory=dict)
    conditional_cavities: Dict[str, CavityState] = field(default_factory=dict)
    which_path_witness: Optional[dict] = None

    @property
    def dims(self) -> Tuple[int, int]:
        return self.final_joint.dims

    @property
    def path_probabilities(self) -> Tuple[float, float]:
        w1, w2 = self.final_joint.path_weights()
        total = w1 + w2
        return w1 / total, w2 / total

    @property
    def marker_overlap(self) -> Optional[complex]:
        """<m1|m2> of the final state, or None when a slit carries no weight."""
        try:
            return cp.marker_states(self.final_joint).overlap
        except ZeroProbability:
            return None

    @property
    def norm(self) -> float:
        return math.sqrt(self.final_joint.weight)


def _branches(state: JointState) -> Dict[str, JointState]:
    return {lab: cp.project_atom(state, lab) for lab in state.basis.labels}


def _probabilities(state: JointState) -> Dict[str, float]:
    total = state.weight
    return {lab: w / total for lab, w in state.level_weights().items()}


def run_cat_preparation(cfg: CatPrepConfig) -> ProtocolReport:
    """Dispersive cat preparation with post-selection on the atomic detector.

    Cavity 2 of the joint state is a one-level placeholder and the atom
    travels along slit 1 only.
    """
    cav = coherent_state(cfg.cavity_amplitude, cfg.dim, cfg.trunc_tol)
    placeholder = CavityState([1.0])
    atom = cp.apply_ramsey(AtomState.level(TWO_LEVEL, "f"), cp.preparation_rotation(cfg.c_e, cfg.c_f))
    state = cp.make_joint((1.0, 0.0), atom, cav, placeholder)
    state = cp.apply_dispersive_two_level(state, 1, cfg.phase)
    state = cp.apply_ramsey(state, cp.CAT_R2)

    refs = {}
    for parity in ("even", "odd"):
        try:
            refs[parity] = cat_state(CatSpec(cfg.alpha, parity), cfg.dim, cfg.trunc_tol)
        except DegenerateCat:
            continue

    probs = _probabilities(state)
    fids, purities, conds = {}, {}, {}
    for lab, p in probs.items():
        if p <= BRANCH_TOL:
            continue
        for parity, ref in refs.items():
            cond = cp.conditional_cavity_state(state, 1, level=lab, reference=ref)
            fids[f"C1|{lab}|{parity}"] = cond.fidelity
        cond = cp.conditional_cavity_state(state, 1, level=lab)
        purities[f"C1|{lab}"] = cond.purity
        conds[lab] = cond.state

    _, post = cp.measure_atom(state, cfg.detect)
    return ProtocolReport(
        protocol="prepare-cat",
        outcome_probabilities=probs,
        final_joint=post,
        branches=_branches(state),
        cavity_fidelities=fids,
        cavity_purities=purities,
        pre_selection=state,
        condition_on=cfg.detect,
        truncation_tail={"C1": tail_mass(cfg.cavity_amplitude, cfg.dim)},
        conditional_cavities=conds,
    )


def _initial_cavities(cfg: WhichPathConfig):
    cav1 = cat_state(CatSpec(cfg.alpha1, "even"), cfg.dims[0], cfg.trunc_tol)
    cav2 = cat_state(CatSpec(cfg.alpha2, "odd"), cfg.dims[1], cfg.trunc_tol)
    return cav1, cav2


def _finish(protocol: str, cfg: WhichPathConfig, state: JointState, refs) -> ProtocolReport:
    fids, purities = {}, {}
    total = state.weight
    for path in Path:
        for lab in state.basis.labels:
            k = state.basis.index(lab)
            if np.sum(np.abs(state.amplitudes[path, k]) ** 2) <= BRANCH_TOL * total:
                continue
            for cavity, ref in ((1, refs[0]), (2, refs[1])):
                cond = cp.conditional_cavity_state(state, cavity, path=path, level=lab, reference=ref)
                key = f"C{cavity}|{path.label}|{lab}"
                fids[key] = cond.fidelity
                purities[key] = cond.purity

    probs = _probabilities(state)
    final = state
    if cfg.condition_on is not None:
        _, final = cp.measure_atom(state, cfg.condition_on)

    tails = {"C1": tail_mass(cfg.alpha1, cfg.dims[0]), "C2": tail_mass(cfg.alpha2, cfg.dims[1])}
    return ProtocolReport(
        protocol=protocol,
        outcome_probabilities=probs,
        final_joint=final,
        branches=_branches(state),
        cavity_fidelities=fids,
        cavity_purities=purities,
        pre_selection=state,
        condition_on=cfg.condition_on,
        truncation_tail=tails,
    )


def run_lambda_which_path(cfg: WhichPathConfig) -> ProtocolReport:
    if cfg.scheme != "lambda":
        raise ConfigError("run_lambda_which_path needs scheme='lambda'")
    cav1, cav2 = _initial_cavities(cfg)
    atom = AtomState.level(LAMBDA, "b")
    if cfg.ramsey_before_slits:
        atom = cp.apply_ramsey(atom, cp.LAMBDA_PRE_SLIT)
    s = 1 / math.sqrt(2)
    state = cp.make_joint((s, s), atom, cav1, cav2)
    state = cp.apply_lambda_dispersive(state, 1, cfg.phase, Path.SLIT1)
    state = cp.apply_lambda_dispersive(state, 2, cfg.phase, Path.SLIT2)
    return _finish("which-path", cfg, state, (cav1, cav2))


def run_cascade_eraser(cfg: WhichPathConfig) -> ProtocolReport:
    if cfg.scheme != "cascade":
        raise ConfigError("run_cascade_eraser needs scheme='cascade'")
    cav1, cav2 = _initial_cavities(cfg)
    atom = AtomState.level(CASCADE, "g")
    if cfg.ramsey_before_slits:
        atom = cp.apply_ramsey(atom, cp.CASCADE_R1)
    s = 1 / math.sqrt(2)
    state = cp.make_joint((s, s), atom, cav1, cav2)
    state = cp.apply_cascade_effective(state, 1, cfg.phase, Path.SLIT1)
    state = cp.apply_cascade_effective(state, 2, cfg.phase, Path.SLIT2)

    witness = None
    if cfg.r2_position != "none":
        behind = Path.SLIT1 if cfg.r2_position == "after_C1" else Path.SLIT2
        scope = None if cfg.r2_scope == "shared" else behind
        state = cp.apply_ramsey(state, cp.CASCADE_R2, path=scope)
        # after R2 the slit-1 beam reads f and the slit-2 beam reads g
        level = "f" if behind is Path.SLIT1 else "g"
        witness = {"level": level, "path": behind.label, "path_fraction": _path_fraction(state, level, behind)}

    report = _finish("eraser", cfg, state, (cav1, cav2))
    report.which_path_witness = witness
    return report


def _path_fraction(state: JointState, level: str, path: Path) -> float:
    """Share of the ``level`` outcome that sits in ``path``'s block."""
    w1, w2 = cp.project_atom(state, level).path_weights()
    if w1 + w2 == 0.0:
        return float("nan")
    return (w1, w2)[path] / (w1 + w2)


def run_which_path(cfg: WhichPathConfig) -> ProtocolReport:
    return run_lambda_which_path(cfg) if cfg.scheme == "lambda" else run_cascade_eraser(cfg)
