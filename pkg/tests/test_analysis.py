from fractions import Fraction as F
from dataclasses import replace

import pytest

from surfacemmp.analysis import (
    INCONSISTENT,
    RATIONAL_OK,
    TORSION_CASE,
    abundance_certificate,
    adjunction_check,
    bpf_certificate,
    detect_canonical_type,
    divisor_report,
    euler_char,
    is_nef,
    keel_locus,
    keel_report,
    numerical_dimension,
)
from surfacemmp.errors import ConfigError
from surfacemmp.lattice import PairingMatrix
from surfacemmp.surface import Boundary, CurveRecord, SurfaceModel

from conftest import load


@pytest.mark.parametrize("d", range(-3, 6))
def test_riemann_roch_p2(p2, d):
    D = p2.model.divisor({"H": d})
    assert euler_char(p2.model, D) == F((d + 1) * (d + 2), 2)


@pytest.mark.parametrize("d,m", [(1, 1), (2, 1), (3, 2), (0, 0), (4, 3), (-1, 0)])
def test_riemann_roch_blowup(blowup, d, m):
    # chi(dH - mE) on Bl_p P^2: conditions imposed by a point of multiplicity m
    D = blowup.model.divisor({"H": d, "E": -m})
    assert euler_char(blowup.model, D) == F((d + 1) * (d + 2), 2) - F(m * (m + 1), 2)


def test_riemann_roch_refuses_singular():
    m = replace(load("p2").model, smooth=False)
    with pytest.raises(ConfigError):
        euler_char(m, m.divisor({"H": 1}))


def test_nef_and_numerical_dimension(blowup):
    m = blowup.model
    assert is_nef(m, m.divisor({"H": 1}))
    assert not is_nef(m, m.divisor({"E": 1}))
    assert numerical_dimension(m, m.divisor({"H": 1})) == 2
    assert numerical_dimension(m, m.divisor({"H": 1, "E": -1})) == 1
    assert numerical_dimension(m, m.divisor({})) == 0
    assert numerical_dimension(m, m.divisor({"E": 1})) is None


def test_keel_locus(blowup):
    m = blowup.model
    assert keel_locus(m, m.divisor({"H": 1})) == ["E"]
    rep = keel_report(m, m.divisor({"H": 1}))
    assert any("P^1" in n for n in rep.notes)
    assert keel_report(m, m.divisor({"H": 2, "E": -1})).notes[0].startswith("semi-ample by Keel reduction")
    with pytest.raises(ConfigError):
        keel_locus(m, m.divisor({"E": 1}))


def test_keel_on_elliptic_fibre():
    m = load("elliptic-fibration").model
    rep = keel_report(m, m.divisor({"F": 1}))
    assert rep.locus == ("F",)
    assert "genus 1" in rep.notes[0]


def test_adjunction_verdicts(blowup):
    assert adjunction_check(blowup.model, "E").verdict == RATIONAL_OK
    ell = load("elliptic-fibration").model
    assert adjunction_check(ell, "F").verdict == TORSION_CASE
    m = SurfaceModel((CurveRecord("C", genus=1),), PairingMatrix.from_rows([[0, 1], [1, -2]]))
    v = adjunction_check(m, "C")
    assert v.verdict == INCONSISTENT and not v.consistent


def test_canonical_type():
    m = load("elliptic-fibration").model
    assert detect_canonical_type(m, {"F": 1})
    v = detect_canonical_type(m, {"F": 2})
    assert not v and v.gcd == 2
    with pytest.raises(ConfigError):
        detect_canonical_type(m, {"F": 0})
    v = detect_canonical_type(m, {"E9": 1})
    assert not v and "K.E_i != 0 for some component" in v.reasons


def test_canonical_type_disconnected():
    # two disjoint elliptic fibres
    rows = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    m = SurfaceModel((CurveRecord("F1", 1), CurveRecord("F2", 1)), PairingMatrix.from_rows(rows))
    v = detect_canonical_type(m, {"F1": 1, "F2": 1})
    assert not v.connected and not v


def test_bpf_issued(p2):
    cert = bpf_certificate(p2.model, Boundary(), p2.model.divisor({"H": 1}))
    assert cert.issued
    assert any("Cartier" in a for a in cert.assumptions)


def test_bpf_rejects_coefficient_one(p2):
    cert = bpf_certificate(p2.model, Boundary({"H": 1}), p2.model.divisor({"H": 1}))
    assert not cert
    assert "delta_j < 1" in cert.reason


def test_bpf_rejects_non_nef(blowup):
    cert = bpf_certificate(blowup.model, Boundary(), blowup.model.divisor({"E": 1}))
    assert cert.reason == "D not nef"
    assert not bpf_certificate(blowup.model, Boundary(), blowup.model.divisor({"H": 1}), cartier=False)


def test_bpf_declared_difference(blowup):
    m = blowup.model
    # D = 0: D - K = -K is nef and big
    assert bpf_certificate(m, Boundary(), m.divisor({}))
    # on the elliptic fibration F - K = F has square 0, so only the declaration helps
    ell = load("elliptic-fibration").model
    D = ell.divisor({"F": 1})
    plain = bpf_certificate(ell, Boundary(), D)
    assert not plain
    assert bpf_certificate(ell, Boundary(), D, difference_semi_ample=True)


def test_abundance():
    ab = load("abelian").model
    assert not abundance_certificate(ab, Boundary())
    assert abundance_certificate(ab, Boundary(), kappa=0)
    assert not abundance_certificate(ab, Boundary(), kappa=1)
    p2 = load("p2").model
    cert = abundance_certificate(p2, Boundary())
    assert not cert and "not nef" in cert.reason
    assert not abundance_certificate(p2, Boundary({"H": 1}))  # K + H = -2H


def test_abundance_big():
    # P^2 with a smooth quartic Q as boundary
    rows = [[9, -3, -12], [-3, 1, 4], [-12, 4, 16]]
    m = SurfaceModel((CurveRecord("H"), CurveRecord("Q", genus=3)), PairingMatrix.from_rows(rows))
    cert = abundance_certificate(m, Boundary({"Q": 1}))
    assert cert.issued  # K + Q = H is nef and big


def test_divisor_report(blowup):
    rep = divisor_report(blowup.model, blowup.model.divisor({"H": 1}))
    assert rep.nef_on_catalog and rep.big_certificate
    assert rep.keel_locus == ("E",)
    assert rep.euler_char == 3
