from fractions import Fraction as F
import random

import pytest

from surfacemmp.errors import ConfigError, InvalidModel
from surfacemmp.lattice import PairingMatrix, is_negative_definite
from surfacemmp.mmp import (
    FANO,
    MINIMAL_MODEL,
    MORI_FIBER,
    MMPConfig,
    contracted_curves,
    fibre_degeneracy,
    find_negative_curve,
    mmp_over_fp,
    proportionality_failures,
    run_mmp,
)
from surfacemmp.surface import Boundary, CurveRecord, SurfaceModel

from conftest import load, model_fixtures
from surfacemmp.document import load_model
from oracles import random_model


def test_config_validation():
    with pytest.raises(ConfigError):
        MMPConfig("XX")
    with pytest.raises(ConfigError):
        MMPConfig(max_steps=-1)
    assert MMPConfig("lc").mode == "LC"
    assert not MMPConfig("FP").boundary_mode


def test_find_negative_curve_picks_most_negative():
    # A: C^2 = -2, (K+D).C = -1/2 ; B: C^2 = -1, (K+D).C = -1
    rows = [[8, 0, -1], [0, -2, 0], [-1, 0, -1]]
    m = SurfaceModel((CurveRecord("A"), CurveRecord("B")), PairingMatrix.from_rows(rows), smooth=False)
    b = Boundary({"A": F(1, 4)})
    assert m.curve_dot(m.log_canonical_class(b), "A") == F(-1, 2)
    assert find_negative_curve(m, b) == "B"


def test_find_negative_curve_none(p2):
    assert find_negative_curve(p2.model, p2.boundary) is None


def test_ties_follow_catalog_order():
    doc = load("blowup-p2-two-points")
    m = doc.model
    # without boundary E1 and E2 both have (K).E = -1
    assert find_negative_curve(m, Boundary()) == [c.id for c in m.curves if c.id in ("E1", "E2", "L")][0]


def test_blowup_p2(blowup):
    run = run_mmp(blowup.model, blowup.boundary)
    assert contracted_curves(run) == ["E"]
    assert run.discrepancies == [1]
    assert run.end_state.kind == FANO and run.end_state.witness == "H"
    assert run.final.pairing[0, 0] == 9
    assert run.ok


def test_p1xp1_mori_fibre():
    run = run_mmp(load("p1xp1").model)
    assert run.steps == []
    assert run.end_state.kind == MORI_FIBER and run.end_state.witness == "F1"
    assert fibre_degeneracy(run.final, "F1") == []
    assert run.ok


def test_abelian_minimal():
    doc = load("abelian")
    run = run_mmp(doc.model, doc.boundary)
    assert run.end_state.kind == MINIMAL_MODEL
    assert run.ok


def test_hirzebruch_f2_with_boundary():
    doc = load("hirzebruch-f2")
    run = run_mmp(doc.model, doc.boundary)
    assert contracted_curves(run) == ["S"]
    assert run.discrepancies == [0]
    assert run.end_state.kind == FANO
    assert run.ok


def test_relative_mode_contracts_only_vertical():
    doc = load("ruled-blowup")
    run = run_mmp(doc.model, doc.boundary, MMPConfig(relative=True))
    for f in run.steps:
        assert f.source.curve(f.exceptional).vertical
    assert run.end_state.kind == MORI_FIBER
    assert any(c.name == "relative-scope" for c in run.validator_log)
    assert run.ok


def test_fp_mode_negative_discrepancy():
    run = mmp_over_fp(load("elliptic-fp").model, load("elliptic-fp").boundary)
    assert contracted_curves(run) == ["C"]
    assert run.discrepancies == [-1]
    assert run.end_state.kind == MINIMAL_MODEL
    assert not run.final.rational_singularities
    assert run.ok


def test_fp_allows_large_coefficients():
    doc = load("blowup-p2-fp")
    assert doc.boundary.max_coefficient() > 1
    with pytest.raises(ConfigError, match="<= 1"):
        run_mmp(doc.model, doc.boundary)
    run = mmp_over_fp(doc.model, doc.boundary)
    assert contracted_curves(run) == ["E"]
    assert any(c.name == "length-bounds" for c in run.validator_log) is False


def test_fp_requires_fbar_p(blowup):
    with pytest.raises(ConfigError, match="fbar_p"):
        mmp_over_fp(blowup.model)


def test_invalid_model_refused():
    m = SurfaceModel((CurveRecord("C", genus=1),), PairingMatrix.from_rows([[8, -1], [-1, -1]]))
    with pytest.raises(InvalidModel):
        run_mmp(m)


def test_step_cap_reports_incomplete():
    doc = load("blowup-p2-two-points")
    run = run_mmp(doc.model, doc.boundary, MMPConfig(max_steps=1))
    assert len(run.steps) == 1
    assert run.end_state.kind == "Incomplete"
    assert not run.ok


@pytest.mark.parametrize("path", model_fixtures(), ids=lambda p: p.stem)
def test_fixture_runs(path):
    doc = load_model(path)
    cfg = MMPConfig("FP" if doc.model.field == "fbar_p" else "QF")
    run = run_mmp(doc.model, doc.boundary, cfg)
    assert len(run.steps) <= len(doc.model.curves)
    assert run.ok, [c for c in run.validator_log if not c.passed]


def test_random_models_invariants():
    rng = random.Random(21)
    for _ in range(80):
        m, b = random_model(rng)
        run = run_mmp(m, b)
        assert len(run.steps) <= len(m.curves)
        for f, value in zip(run.steps, run.values):
            assert value < 0
            assert f.target.dim == f.source.dim - 1
            # each contracted curve has negative self-intersection on its source
            k = f.exceptional_index
            assert is_negative_definite(PairingMatrix.from_rows([[f.source.pairing[k, k]]]))
        assert run.end_state.kind in (FANO, MORI_FIBER, MINIMAL_MODEL)
        assert run.ok


def test_fano_witness_proportionality(blowup):
    run = run_mmp(blowup.model)
    assert proportionality_failures(run.final, "H") == []


def test_report_dict(blowup):
    d = run_mmp(blowup.model).to_dict()
    assert d["steps"][0]["curve"] == "E"
    assert d["steps"][0]["basis_dim"] == [3, 2]
    assert d["end_state"] == {"kind": FANO, "witness": "H"}
    assert "catalog" in d["note"]
