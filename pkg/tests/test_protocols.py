import itertools
import math

import numpy as np
import pytest

from cqed_eraser import composite as cp
from cqed_eraser.composite import Path
from cqed_eraser.errors import ConfigError, TruncationError, ZeroProbability
from cqed_eraser.fock import CatSpec, cat_state, coherent_state, fidelity
from cqed_eraser.protocols import (
    CatPrepConfig,
    WhichPathConfig,
    run_cascade_eraser,
    run_cat_preparation,
    run_lambda_which_path,
    run_which_path,
)

S = 1 / math.sqrt(2)


# ---- cat preparation

def test_cat_prep_detect_f_even_cat():
    rep = run_cat_preparation(CatPrepConfig(alpha=2, c_e=S, c_f=S, detect="f"))
    assert rep.outcome_probabilities["f"] == pytest.approx((1 + math.exp(-8)) / 2, abs=1e-10)
    assert rep.outcome_probabilities["f"] == pytest.approx(0.500168, abs=1e-6)
    assert rep.cavity_fidelities["C1|f|even"] == pytest.approx(1.0, abs=1e-10)
    assert rep.cavity_fidelities["C1|f|odd"] < 1e-20


def test_cat_prep_detect_e_odd_cat():
    rep = run_cat_preparation(CatPrepConfig(alpha=2, c_e=S, c_f=S, detect="e"))
    assert rep.outcome_probabilities["e"] == pytest.approx((1 - math.exp(-8)) / 2, abs=1e-10)
    assert rep.cavity_fidelities["C1|e|odd"] == pytest.approx(1.0, abs=1e-10)
    post_cavity = cp.conditional_cavity_state(rep.final_joint, 1)
    assert fidelity(post_cavity.state, cat_state(CatSpec(2, "odd"))) == pytest.approx(1.0, abs=1e-10)


def test_cat_prep_opposite_coefficients_swap_parity():
    rep = run_cat_preparation(CatPrepConfig(alpha=1.5, c_e=S, c_f=-S))
    assert rep.cavity_fidelities["C1|f|odd"] == pytest.approx(1.0, abs=1e-10)
    assert rep.cavity_fidelities["C1|e|even"] == pytest.approx(1.0, abs=1e-10)


def test_cat_prep_no_superposition_gives_coherent_state():
    rep = run_cat_preparation(CatPrepConfig(alpha=2, c_e=1, c_f=0, detect="e"))
    assert rep.outcome_probabilities["e"] == pytest.approx(0.5, abs=1e-12)
    cav = rep.conditional_cavities["e"]
    assert fidelity(cav, coherent_state(2, 64)) == pytest.approx(1.0, abs=1e-12)


def test_cat_prep_probabilities_sum_to_one():
    rep = run_cat_preparation(CatPrepConfig(alpha=0.8 + 0.3j, c_e=0.6, c_f=0.8j))
    assert sum(rep.outcome_probabilities.values()) == pytest.approx(1.0, abs=1e-12)


def test_cat_prep_invalid_config():
    with pytest.raises(ConfigError):
        CatPrepConfig(c_e=1, c_f=1)
    with pytest.raises(ConfigError):
        CatPrepConfig(detect="g")
    with pytest.raises(TruncationError):
        run_cat_preparation(CatPrepConfig(alpha=3, dim=8))


# ---- lambda which-path

def test_lambda_no_ramsey_tags_paths():
    rep = run_lambda_which_path(WhichPathConfig(scheme="lambda"))
    assert rep.marker_overlap == 0
    assert rep.outcome_probabilities == pytest.approx({"a": 0.0, "b": 0.5, "c": 0.5}, abs=1e-12)
    amps = rep.final_joint.amplitudes
    assert np.sum(np.abs(amps[0, 2]) ** 2) == 0 and np.sum(np.abs(amps[1, 1]) ** 2) == 0


def test_lambda_condition_on_b_selects_slit1():
    rep = run_lambda_which_path(WhichPathConfig(condition_on="b"))
    assert rep.path_probabilities == pytest.approx((1.0, 0.0), abs=1e-12)
    assert rep.marker_overlap is None


def test_lambda_condition_on_a_impossible():
    with pytest.raises(ZeroProbability):
        run_lambda_which_path(WhichPathConfig(condition_on="a"))


def test_lambda_ramsey_gives_parallel_markers():
    rep = run_lambda_which_path(WhichPathConfig(ramsey_before_slits=True))
    ov = rep.marker_overlap
    assert abs(ov) == pytest.approx(1.0, abs=1e-12)
    assert ov.real < 0
    blocks = rep.final_joint.amplitudes
    # slit-2 markers are exactly minus the slit-1 markers
    assert np.max(np.abs(blocks[1] + blocks[0])) < 1e-12


def test_lambda_wrong_scheme():
    with pytest.raises(ConfigError):
        run_lambda_which_path(WhichPathConfig(scheme="cascade"))


# ---- cascade eraser

def test_cascade_r1_no_fringes():
    rep = run_cascade_eraser(WhichPathConfig(scheme="cascade", ramsey_before_slits=True))
    assert abs(rep.marker_overlap) < 1e-15


def test_cascade_no_r1_full_fringes():
    rep = run_cascade_eraser(WhichPathConfig(scheme="cascade"))
    assert abs(rep.marker_overlap) == pytest.approx(1.0, abs=1e-12)
    # U2 acts trivially on g: plus sign between the branches
    assert rep.marker_overlap.real > 0
    assert rep.outcome_probabilities["g"] == pytest.approx(1.0, abs=1e-15)


def test_cascade_r2_after_c1_f_means_slit1():
    rep = run_cascade_eraser(
        WhichPathConfig(scheme="cascade", ramsey_before_slits=True, r2_position="after_C1", condition_on="f")
    )
    p1, p2 = rep.path_probabilities
    assert p2 <= 1e-12 and p1 == pytest.approx(1.0, abs=1e-12)
    assert rep.which_path_witness["path_fraction"] == pytest.approx(1.0, abs=1e-12)


def test_cascade_r2_after_c2_g_means_slit2():
    rep = run_cascade_eraser(
        WhichPathConfig(scheme="cascade", ramsey_before_slits=True, r2_position="after_C2", condition_on="g")
    )
    assert rep.path_probabilities[1] == pytest.approx(1.0, abs=1e-12)


def test_cascade_branch_scoped_r2_is_not_exclusive():
    # a read-out zone behind slit 1 only leaves half of the slit-2 beam in f
    rep = run_cascade_eraser(
        WhichPathConfig(
            scheme="cascade", ramsey_before_slits=True, r2_position="after_C1", r2_scope="branch", condition_on="f"
        )
    )
    assert rep.path_probabilities == pytest.approx((2 / 3, 1 / 3), abs=1e-12)
    assert rep.outcome_probabilities["f"] == pytest.approx(0.75, abs=1e-12)


def test_cascade_config_validation():
    with pytest.raises(ConfigError):
        WhichPathConfig(scheme="cascade", r2_position="after_C1")
    with pytest.raises(ConfigError):
        WhichPathConfig(scheme="lambda", ramsey_before_slits=True, r2_position="after_C1")
    with pytest.raises(ConfigError):
        WhichPathConfig(scheme="cascade", condition_on="b")
    with pytest.raises(ConfigError):
        WhichPathConfig(scheme="bogus")


# ---- properties over the configuration grid

def config_grid():
    for alpha, ramsey in itertools.product((0.5, 1.0, 2.0, 1 + 1j), (False, True)):
        yield WhichPathConfig(alpha1=alpha, alpha2=alpha, scheme="lambda", ramsey_before_slits=ramsey)
        yield WhichPathConfig(alpha1=alpha, alpha2=alpha, scheme="cascade", ramsey_before_slits=ramsey)
        if ramsey:
            for pos in ("after_C1", "after_C2"):
                yield WhichPathConfig(
                    alpha1=alpha, alpha2=alpha, scheme="cascade", ramsey_before_slits=True, r2_position=pos
                )


@pytest.mark.parametrize("cfg", list(config_grid()), ids=lambda c: f"{c.scheme}-{c.alpha1}-{c.ramsey_before_slits}-{c.r2_position}")
def test_grid_invariants(cfg):
    rep = run_which_path(cfg)
    assert sum(rep.outcome_probabilities.values()) == pytest.approx(1.0, abs=1e-12)
    assert rep.norm == pytest.approx(1.0, abs=1e-12)
    # markers are either orthogonal or parallel
    mag = abs(rep.marker_overlap)
    assert min(mag, abs(mag - 1)) <= 1e-10
    for key, f in rep.cavity_fidelities.items():
        assert abs(f - 1) <= 1e-10, key
        assert f <= 1 + 1e-12
    for lab, p in rep.outcome_probabilities.items():
        if p > 0:
            assert cp.measure_atom(rep.final_joint, lab)[0] == pytest.approx(p, abs=1e-12)


@pytest.mark.parametrize("phi", [math.pi / 2, math.pi / 4, 1.0])
@pytest.mark.parametrize("ramsey", [False, True])
def test_lambda_off_pi_keeps_norm_and_purity(phi, ramsey):
    rep = run_lambda_which_path(WhichPathConfig(phase=phi, ramsey_before_slits=ramsey, alpha1=1.0, alpha2=1.0))
    assert rep.norm == pytest.approx(1.0, abs=1e-12)
    for key, purity in rep.cavity_purities.items():
        assert purity == pytest.approx(1.0, abs=1e-10), key
    # away from pi the cavity fields are no longer left untouched on every branch
    assert min(rep.cavity_fidelities.values()) < 1 - 1e-6


def test_report_dims_and_tails():
    rep = run_which_path(WhichPathConfig(dims=(48, 40)))
    assert rep.dims == (48, 40)
    assert set(rep.truncation_tail) == {"C1", "C2"}
    assert all(t < 1e-12 for t in rep.truncation_tail.values())
