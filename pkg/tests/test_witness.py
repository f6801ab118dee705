"""Witness objects, verification clauses, and frame back-mapping."""

import pytest

from padic_forms.errors import CertificateError
from padic_forms.forms import AdditiveForm, cyclic_shift, reduce_levels
from padic_forms.ring import RingElem
from padic_forms.witness import (
    Witness,
    exact_coeffs,
    map_to_origin,
    solve_anchor,
    verify_witness,
)


def elem(a, b, K):
    return RingElem(a, b, K)


def test_verify_accepts_hensel_pair():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7, 0)], 10)
    coeffs = [f.coeffs[0], f.coeffs[1]]
    vals = solve_anchor(coeffs, 6, [elem(1, 0, 10), elem(1, 0, 10)], 0)
    w = Witness(tuple(vals), 0, 10)
    assert verify_witness(f, w)
    total = f.evaluate(w.values)
    assert total.is_zero()


def test_verify_rejects_no_unit():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7, 0)], 10)
    zero = elem(0, 0, 10)
    assert not verify_witness(f, Witness((zero, zero), 0, 10))


def test_verify_rejects_shallow_valuation():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7, 0)], 10)
    # 1 + 7 = 8: vanishes mod 8 but a claim of V = 2 fails the level+3 bar
    w = Witness((elem(1, 0, 10), elem(1, 0, 10)), 0, 2)
    assert not verify_witness(f, w)


def test_verify_rejects_overclaimed_precision():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7, 0)], 10)
    coeffs = list(f.coeffs)
    vals = solve_anchor(coeffs, 6, [elem(1, 0, 10), elem(1, 0, 10)], 0)
    assert not verify_witness(f, Witness(tuple(vals), 0, 11))


def test_verify_rejects_nonvanishing_sum():
    f = AdditiveForm.from_pairs(6, [(1, 0), (1, 0)], 10)
    w = Witness((elem(1, 0, 10), elem(1, 0, 10)), 0, 10)
    assert not verify_witness(f, w)


def test_witness_json_roundtrip():
    w = Witness((elem(621, 0, 10), elem(1, 0, 10)), 0, 10)
    doc = w.to_json()
    assert doc == {
        "values": [[621, 0], [1, 0]],
        "primitive": 0,
        "target_valuation": 10,
        "precision": 10,
    }
    assert Witness.from_json(doc) == w


def test_solve_anchor_kills_all_digits():
    K = 14
    coeffs = [elem(1, 0, K), elem(7, 0, K), elem(1, 1, K)]
    vals = [elem(1, 0, K), elem(1, 0, K), elem(0, 0, K)]
    # 1 + 7 = 8 vanishes mod 2^3, clearing the anchor's level-0 bar
    total0 = sum(
        (c * v ** 6 for c, v in zip(coeffs, vals)), elem(0, 0, K)
    )
    assert total0.valuation() >= 3
    out = solve_anchor(coeffs, 6, vals, 0)
    total = sum((c * v ** 6 for c, v in zip(coeffs, out)), elem(0, 0, K))
    assert total.is_zero()
    assert out[1] == vals[1] and out[2] == vals[2]


def test_exact_coeffs_recovers_shift_truncation():
    f = AdditiveForm.from_pairs(6, [(1, 0), (3, 0)], 8)
    g = cyclic_shift(f, 4)
    K = 12
    exact = exact_coeffs(g, K)
    assert exact[0] == elem(16, 0, K)
    assert exact[1] == elem(48, 0, K)  # wider than g's storage precision


def test_exact_coeffs_after_reduction():
    f = AdditiveForm.from_pairs(6, [(1, 0), (3 << 6, 0)], 16)
    g = reduce_levels(f)
    assert g.levels() == (0, 0)
    exact = exact_coeffs(g, 20)
    assert exact[1] == elem(3, 0, 20)


def test_map_to_origin_identity_without_frame():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7, 0)], 10)
    w = Witness((elem(621, 0, 10), elem(1, 0, 10)), 0, 10)
    assert map_to_origin(f, w) is w


def test_map_to_origin_scales_substituted_variables():
    f = AdditiveForm.from_pairs(6, [(1, 0), (7 << 6, 0)], 16)
    g = reduce_levels(f)
    # witness in g's frame using both variables, anchor solved exactly
    coeffs = exact_coeffs(g, 16)
    vals = solve_anchor(coeffs, 6, [elem(1, 0, 16), elem(1, 0, 16)], 0)
    w = map_to_origin(g, Witness(tuple(vals), 0, 16))
    # x_0 = 2 y_0 keeps variable 1 (substitution exponent 1) the unit
    assert w.values[1].is_unit()
    assert w.values[0].valuation() == 1
    assert w.primitive == 1
    assert verify_witness(f, w)


def test_map_to_origin_rejects_empty_support():
    f = AdditiveForm.from_pairs(6, [(1, 0), (3 << 6, 0)], 16)
    g = reduce_levels(f)
    K = g.K
    w = Witness((elem(0, 0, K), elem(0, 0, K)), 0, K)
    with pytest.raises(CertificateError):
        map_to_origin(g, w)
