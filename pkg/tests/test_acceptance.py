"""Acceptance criteria, one test each; conftest prints a PASS/FAIL line per criterion."""
import csv
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from cqed_eraser import oracle, screen
from cqed_eraser.cli import main, parse_config, report_fields
from cqed_eraser.fock import CatSpec, cat_state, coherent_state, fidelity, parity_projector_apply
from cqed_eraser.protocols import (
    CatPrepConfig,
    WhichPathConfig,
    run_cat_preparation,
    run_which_path,
)
from cqed_eraser.screen import ScreenModel

MODEL = ScreenModel.default()
S = 1 / math.sqrt(2)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def sweep_configs():
    """The default sweep grid as protocol configurations."""
    ns = parse_config(["sweep"])
    for scheme in ns.schemes:
        for alpha in ns.alphas:
            for phi in ns.phis:
                for ramsey in ns.ramsey_options:
                    for dim in ns.dims:
                        yield WhichPathConfig(
                            alpha1=alpha, alpha2=alpha, scheme=scheme,
                            ramsey_before_slits=ramsey, dims=(dim, dim), phase=phi,
                        )


@criterion(1, "cat preparation: even cat on f, probability (1+e^-8)/2, < 1 s")
def test_cat_preparation():
    t0 = time.perf_counter()
    rep = run_cat_preparation(CatPrepConfig(alpha=2, c_e=S, c_f=S, detect="f", dim=64))
    elapsed = time.perf_counter() - t0
    even = (coherent_state(2, 64).amplitudes + coherent_state(-2, 64).amplitudes)
    even = even / np.linalg.norm(even)
    cav = rep.conditional_cavities["f"].amplitudes
    assert abs(np.vdot(even, cav)) ** 2 >= 1 - 1e-10
    assert abs(rep.outcome_probabilities["f"] - (1 + math.exp(-8)) / 2) <= 1e-10
    # independent dense pipeline at small dims, converging toward the same value
    from test_oracle import dense_cat_preparation

    errs = [abs(dense_cat_preparation(2.0, S, S, d)["f"][0] - (1 + math.exp(-8)) / 2) for d in (12, 14, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert elapsed < 1.0


@criterion(2, "lambda without Ramsey: V = 0, D = 1, conditional b pattern = 1/2 |psi1|^2")
def test_which_path_destroys_fringes():
    rep = run_which_path(WhichPathConfig(scheme="lambda"))
    assert screen.visibility_analytic(rep.final_joint) <= 1e-10
    assert screen.distinguishability(rep.final_joint) >= 1 - 1e-10
    cond = screen.intensity_pattern(rep.branches["b"], MODEL).intensity
    ref = 0.5 * np.abs(screen.slit_amplitude(MODEL, 1, MODEL.grid)) ** 2
    assert np.max(np.abs(cond - ref)) <= 1e-10


@criterion(3, "lambda with Ramsey: V = 1, negative cross term, central minimum")
def test_eraser_restores_fringes():
    rep = run_which_path(WhichPathConfig(scheme="lambda", ramsey_before_slits=True))
    pat = screen.intensity_pattern(rep.final_joint, MODEL)
    assert abs(screen.visibility_analytic(rep.final_joint) - 1) <= 1e-9
    assert abs(pat.metadata["visibility_empirical"] - 1) <= 1e-9
    assert screen.cross_term_sign(rep.final_joint) == -1
    near = np.abs(MODEL.grid) <= MODEL.period / 2
    assert np.all(pat.at(0.0) <= pat.intensity[near] + 1e-15)


@criterion(4, "cascade: R1 kills fringes, no R1 keeps them, R2 after C1 + f picks slit 1")
def test_cascade_scheme():
    with_r1 = run_which_path(WhichPathConfig(scheme="cascade", ramsey_before_slits=True))
    assert screen.visibility_analytic(with_r1.final_joint) <= 1e-10
    without = run_which_path(WhichPathConfig(scheme="cascade"))
    assert screen.visibility_analytic(without.final_joint) >= 1 - 1e-9
    readout = run_which_path(
        WhichPathConfig(scheme="cascade", ramsey_before_slits=True, r2_position="after_C1", condition_on="f")
    )
    p1, p2 = readout.path_probabilities
    assert p2 <= 1e-12 and abs(p1 - 1) <= 1e-12


@criterion(5, "parity projector relations on cat states, dim >= 48, |alpha| <= 2")
def test_parity_algebra():
    for dim in (48, 64):
        for alpha in (0.25, 0.5, 1.0, 2.0, 2j, 1.2 - 1.6j, -1.0 + 0.5j):
            even = cat_state(CatSpec(alpha, "even"), dim)
            odd = cat_state(CatSpec(alpha, "odd"), dim)
            assert np.array_equal(parity_projector_apply(even, "+").amplitudes, even.amplitudes)
            assert parity_projector_apply(even, "-").norm2 ** 0.5 <= 1e-13
            assert parity_projector_apply(odd, "+").norm2 ** 0.5 <= 1e-13
            assert np.array_equal(parity_projector_apply(odd, "-").amplitudes, -odd.amplitudes)


@criterion(6, "structured kernels match dense matrices within 1e-12, dims <= 16, < 10 s")
def test_oracle_equivalence():
    t0 = time.perf_counter()
    results = oracle.run_oracle_check(max_dim=16, trials=100, seed=2024)
    elapsed = time.perf_counter() - t0
    assert len(results) == 100
    assert max(dev for _, dev in results) <= 1e-12
    assert elapsed < 10.0


@criterion(7, "cavity fidelities = 1 within 1e-10 across the default sweep")
def test_cavity_invariance():
    n = 0
    for cfg in sweep_configs():
        rep = run_which_path(cfg)
        for key, f in rep.cavity_fidelities.items():
            assert abs(f - 1) <= 1e-10, (cfg, key, f)
            n += 1
    assert n > 0


@criterion(8, "V^2 + D^2 = 1 within 1e-6 on every sweep row, V and D in [0, 1]")
def test_duality(tmp_path):
    assert main(["sweep", "--out-dir", str(tmp_path)]) == 0
    with open(tmp_path / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows
    for row in rows:
        v, d = float(row["visibility"]), float(row["distinguishability"])
        assert 0 <= v <= 1 + 1e-12 and 0 <= d <= 1 + 1e-12
        assert abs(v * v + d * d - 1) <= 1e-6
        assert abs(float(row["v2_plus_d2"]) - 1) <= 1e-6


def _scalars(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _scalars(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _scalars(v, f"{prefix}{i}.")
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield prefix.rstrip("."), float(obj)


CONVERGENCE_RUNS = [
    dict(scheme="lambda"),
    dict(scheme="lambda", ramsey_before_slits=True),
    dict(scheme="lambda", condition_on="b"),
    dict(scheme="cascade"),
    dict(scheme="cascade", ramsey_before_slits=True),
    dict(scheme="cascade", ramsey_before_slits=True, r2_position="after_C1", condition_on="f"),
    dict(scheme="cascade", ramsey_before_slits=True, r2_position="after_C2"),
    dict(scheme="lambda", phase=math.pi / 2),
]


@criterion(9, "doubling dim 64 -> 128 at alpha = 2 moves every reported scalar by < 1e-8")
def test_truncation_convergence():
    def reports(dim):
        out = [report_fields(run_cat_preparation(CatPrepConfig(alpha=2, dim=dim)))]
        for kw in CONVERGENCE_RUNS:
            rep = run_which_path(WhichPathConfig(alpha1=2, alpha2=2, dims=(dim, dim), **kw))
            out.append(report_fields(rep, MODEL))
        return out

    worst = 0.0
    for a, b in zip(reports(64), reports(128)):
        a.pop("dims")
        b.pop("dims")
        sa, sb = dict(_scalars(a)), dict(_scalars(b))
        assert sa.keys() == sb.keys()
        for key in sa:
            worst = max(worst, abs(sa[key] - sb[key]))
    assert worst < 1e-8


DETERMINISM_RUNS = [
    ["which-path", "--ramsey", "--plot-data"],
    ["which-path", "--scheme", "cascade", "--alpha1", "1+0.5j"],
    ["eraser", "--r1", "--r2-position", "after_C2", "--condition-on", "g"],
    ["prepare-cat", "--alpha", "1.5", "--detect", "e"],
    ["sweep", "--jobs", "3"],
]


@criterion(10, "repeated identical runs give byte-identical CSV and report files")
def test_determinism(tmp_path):
    for i, args in enumerate(DETERMINISM_RUNS):
        outputs = []
        for rep in range(2):
            out = tmp_path / f"run{i}_{rep}"
            proc = subprocess.run(
                [sys.executable, "-m", "cqed_eraser", *args, "--out-dir", str(out), "--seed", "7"],
                capture_output=True,
            )
            assert proc.returncode == 0, proc.stderr
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        assert outputs[0] == outputs[1], args
        assert outputs[0]
        for name, data in outputs[0].items():
            if name.endswith(".json"):
                json.loads(data)
