import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from pigeonhole.ensemble import (
    Ensemble,
    ExpansionReport,
    UndefinedRatioError,
    UndefinedWeakValueError,
    expansion_coefficients,
    overlap_normalized_ratio,
    paper_ensemble,
    success_probability,
    transition_ratio,
    verify_second_order_identity,
    weak_value,
)
from pigeonhole.quantum import (
    DimensionError,
    Operator,
    ghz_projector,
    identity,
    parity_projector,
    qubit_pairs,
)

PAPER = paper_ensemble()
PAIRS = qubit_pairs(3)


def test_success_probability_examples():
    assert success_probability(PAPER) == pytest.approx(1 / 8, abs=1e-15)
    assert success_probability(Ensemble(PAPER.pre, PAPER.pre)) == pytest.approx(1.0, abs=1e-15)
    assert success_probability(Ensemble.from_labels("H", "V")) == 0


def test_ensemble_rejects_mismatch():
    with pytest.raises(DimensionError):
        Ensemble.from_labels("++", "RRR")


def test_pair_amplitudes_vanish_against_oracle():
    for i, j in PAIRS:
        brute = oracles.amplitude("RRR", "+++", oracles.pair_equal(i, j))
        assert abs(brute) < 1e-15
        assert abs(weak_value(parity_projector(i, j, 3), PAPER)) < 1e-12


def test_three_body_weak_value():
    brute = oracles.amplitude("RRR", "+++", oracles.all_equal)
    # frozen from the brute-force loop: (1 + i) / 8
    assert brute == pytest.approx((1 + 1j) / 8, abs=1e-15)
    assert weak_value(ghz_projector(3), PAPER) == pytest.approx(-0.5, abs=1e-12)


def test_weak_value_identity_and_orthogonal():
    assert weak_value(identity(3), PAPER) == pytest.approx(1.0)
    with pytest.raises(UndefinedWeakValueError):
        weak_value(identity(1), Ensemble.from_labels("H", "V"))


def test_transition_ratio_examples():
    assert transition_ratio(parity_projector(1, 2, 3), PAPER) == pytest.approx(0.0, abs=1e-15)
    s123 = transition_ratio(ghz_projector(3), PAPER)
    brute = abs(oracles.amplitude("RRR", "+++", oracles.all_equal)) ** 2 / oracles.projected_norm2(
        "+++", oracles.all_equal
    )
    assert brute == pytest.approx(1 / 8)
    assert s123 == pytest.approx(brute, abs=1e-15)
    assert transition_ratio(identity(3), PAPER) == pytest.approx(1 / 8)


def test_transition_ratio_annihilated():
    with pytest.raises(UndefinedRatioError):
        transition_ratio(parity_projector(1, 2, 2), Ensemble.from_labels("HV", "HV"))


def test_overlap_normalized_ratio_for_ghz():
    # |<phi|S_123|psi>|^2 / |<phi|psi>|^2 = (1/32) / (1/8)
    assert overlap_normalized_ratio(ghz_projector(3), PAPER) == pytest.approx(0.25, abs=1e-14)


def test_pair_ratios_symmetric():
    vals = [transition_ratio(parity_projector(i, j, 3), PAPER) for i, j in PAIRS]
    assert max(vals) - min(vals) <= 1e-15


def test_expansion_paper():
    rep = expansion_coefficients(PAPER)
    assert rep.c0 == pytest.approx(-(1 + 1j) / 4, abs=1e-14)
    assert abs(rep.c1) < 1e-14
    assert rep.c2 == pytest.approx(3 * (1 + 1j) / 4, abs=1e-14)
    assert 0 < rep.lambda_validity < 0.1


def test_expansion_diagonal_case():
    rep = expansion_coefficients(Ensemble.from_labels("+++", "+++"))
    assert rep.c0 == pytest.approx(1)
    assert rep.c1 == pytest.approx(1.5)
    assert rep.c2 == pytest.approx(3)


@pytest.mark.parametrize("post", ["HHH", "RRL", "-+H", "LLL"])
def test_expansion_matches_brute_force(post):
    rep = expansion_coefficients(Ensemble.from_labels("+++", post))
    c1 = sum(oracles.amplitude(post, "+++", oracles.pair_equal(i, j)) for i, j in PAIRS)
    c2 = c1 + 6 * oracles.amplitude(post, "+++", oracles.all_equal)
    assert rep.c1 == pytest.approx(c1, abs=1e-14)
    assert rep.c2 == pytest.approx(c2, abs=1e-14)


def test_expansion_hhh_post():
    rep = expansion_coefficients(Ensemble.from_labels("+++", "HHH"))
    assert rep.c1 == pytest.approx(3 / (2 * math.sqrt(2)), abs=1e-14)


def test_expansion_needs_three_qubits():
    with pytest.raises(DimensionError):
        expansion_coefficients(Ensemble.from_labels("++", "RR"))


def test_lambda_validity_bound():
    rep = expansion_coefficients(PAPER, f_max=10.0)
    bound = (3 * 10.0 * rep.lambda_validity) ** 3 / 6
    assert bound == pytest.approx(1e-3 * abs(rep.c0), rel=1e-12)


def test_expansion_json_round_trip():
    rep = expansion_coefficients(PAPER)
    d = json.loads(json.dumps(rep.to_json_dict()))
    assert d["c0"] == [rep.c0.real, rep.c0.imag]
    assert ExpansionReport.from_json_dict(d) == rep


def test_second_order_identity():
    ok, residual = verify_second_order_identity(3)
    assert ok and residual <= 1e-12
    ok, residual = verify_second_order_identity(3, drop_ghz_term=True)
    assert not ok and residual >= 0.7


single_labels = st.text("HV+-RL", min_size=3, max_size=3)
complex_entries = arrays(
    complex, (8, 8), elements=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
)


@settings(max_examples=40)
@given(single_labels, single_labels)
def test_identity_ratio_equals_success(pre, post):
    e = Ensemble.from_labels(pre, post)
    assert transition_ratio(identity(3), e) == pytest.approx(success_probability(e), abs=1e-14)


@settings(max_examples=40)
@given(complex_entries, complex_entries, st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_weak_value_linear(a_mat, b_mat, a, b):
    A, B = Operator(a_mat), Operator(b_mat)
    lhs = weak_value(a * A + b * B, PAPER)
    rhs = a * weak_value(A, PAPER) + b * weak_value(B, PAPER)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(rhs)))


def test_paradox_at_amplitude_level():
    for i, j in PAIRS:
        assert abs(weak_value(parity_projector(i, j, 3), PAPER)) <= 1e-12
    assert abs(weak_value(ghz_projector(3), PAPER)) > 0.4


def test_lll_conjugate_symmetry():
    rrr = Ensemble.from_labels("+++", "RRR")
    lll = Ensemble.from_labels("+++", "LLL")
    for op in [parity_projector(i, j, 3) for i, j in PAIRS] + [ghz_projector(3)]:
        assert transition_ratio(op, lll) == pytest.approx(transition_ratio(op, rrr), abs=1e-15)
        assert weak_value(op, lll) == pytest.approx(weak_value(op, rrr).conjugate(), abs=1e-14)
