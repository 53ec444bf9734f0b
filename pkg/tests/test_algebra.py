import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from nilsampling import (
    AlgebraSpec,
    ConfigError,
    b_matrix,
    det_polynomial,
    faithful_rep,
    get_preset,
    load_algebra,
    validate_condition,
)
from nilsampling.algebra import b_matrix_exact, det_exact
from nilsampling.group import multiply_array

PRESET_NAMES = ["heisenberg", "heisenberg_product", "rotation6d", "rotation_alpha"]


def sympy_det(spec):
    """Independent oracle: symbolic determinant of the bracket matrix."""
    lam = sympy.symbols(f"l1:{spec.center_dim + 1}")
    mat = sympy.Matrix(
        spec.d,
        spec.d,
        lambda i, j: sum(sympy.Rational(c.numerator, c.denominator) * l for c, l in zip(spec.c[i][j], lam)),
    )
    return sympy.Poly(sympy.expand(mat.det()), *lam), lam


def our_poly_as_sympy(poly, lam):
    expr = 0
    for exps, coeff in poly.coeffs.items():
        term = sympy.Rational(coeff.numerator, coeff.denominator)
        for sym, e in zip(lam, exps):
            term *= sym**e
        expr += term
    return sympy.Poly(expr, *lam)


# --- parsing -----------------------------------------------------------------


def test_load_toml_and_json_agree():
    toml_doc = """
    name = "h"
    n = 3
    d = 1
    brackets = [{i = 1, j = 1, z_coeffs = ["1/2"]}]
    """
    json_doc = '{"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": ["1/2"]}]}'
    a, b = load_algebra(toml_doc), load_algebra(json_doc)
    assert a.c == b.c == (((Fraction(1, 2),),),)
    assert a.name == "h"


def test_nested_algebra_table():
    doc = {"algebra": {"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": [2]}]}}
    assert load_algebra(doc).c[0][0][0] == 2


@pytest.mark.parametrize(
    "doc",
    [
        {"n": 2, "d": 1, "brackets": []},  # trivial center
        {"n": 3, "d": 0, "brackets": []},
        {"d": 1, "brackets": []},
        {"n": 3, "d": 1, "brackets": [{"i": 2, "j": 1, "z_coeffs": [1]}]},
        {"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": [1, 2]}]},
        {"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": ["x"]}]},
        {"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": [0.3]}]},
        {"n": 3, "d": 1, "brackets": [{"i": 1, "j": 1, "z_coeffs": [1]}, {"i": 1, "j": 1, "z_coeffs": [2]}]},
        {"n": 3, "d": 1, "brackets": "nope"},
        {"n": 3, "d": 1, "scale": -1.0, "brackets": []},
    ],
)
def test_malformed_documents_raise(doc):
    with pytest.raises(ConfigError):
        load_algebra(doc)


def test_unparseable_text_raises():
    with pytest.raises(ConfigError):
        load_algebra("n = = 3")


def test_round_trip_through_dict():
    spec = get_preset("rotation6d")
    again = load_algebra(
        {"n": spec.n, "d": spec.d, "brackets": [{"i": b["i"], "j": b["j"], "z_coeffs": b["z_coeffs"]} for b in spec.to_dict()["brackets"]]}
    )
    assert again.c == spec.c


# --- B(λ) and the determinant ---------------------------------------------------


def test_b_matrix_rotation():
    spec = get_preset("rotation6d")
    np.testing.assert_array_equal(b_matrix(spec, [2.0, 3.0]), [[2.0, 3.0], [-3.0, 2.0]])


def test_b_matrix_batched_shape():
    spec = get_preset("heisenberg_product")
    lam = np.random.default_rng(0).normal(size=(4, 5, 2))
    B = b_matrix(spec, lam)
    assert B.shape == (4, 5, 2, 2)
    np.testing.assert_allclose(B[..., 0, 0], lam[..., 0])
    np.testing.assert_allclose(B[..., 1, 1], lam[..., 1])


def test_b_matrix_rejects_wrong_length():
    with pytest.raises(ValueError):
        b_matrix(get_preset("heisenberg"), [1.0, 2.0])


@pytest.mark.parametrize(
    "name, text, degree",
    [
        ("rotation6d", "λ1^2 + λ2^2", 2),
        ("heisenberg", "λ1", 1),
        ("heisenberg_product", "λ1*λ2", 2),
    ],
)
def test_det_polynomial_examples(name, text, degree):
    poly = det_polynomial(get_preset(name))
    assert poly.format() == text
    assert poly.degree == degree


def test_det_polynomial_repeated_center_direction():
    spec = AlgebraSpec.from_brackets(5, 2, [(1, 1, [1]), (2, 2, [1])])
    poly = det_polynomial(spec)
    assert poly.coeffs == {(2,): Fraction(1)}
    assert validate_condition(spec).nonvanishing


def test_zero_algebra_fails_condition():
    spec = AlgebraSpec.from_brackets(5, 2, [])
    report = validate_condition(spec)
    assert not report.nonvanishing and not report.ok
    assert det_polynomial(spec).is_zero


def test_rotation_condition_report():
    report = validate_condition(get_preset("rotation6d")).to_dict()
    assert report["nonvanishing"] is True and report["degree"] == 2 and report["homogeneous"] is True


@pytest.mark.parametrize("seed", range(6))
def test_det_polynomial_matches_sympy(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    k = int(rng.integers(1, 4))
    brackets = [
        (i + 1, j + 1, [Fraction(int(v), int(rng.integers(1, 4))) for v in rng.integers(-3, 4, size=k)])
        for i in range(d)
        for j in range(d)
        if rng.random() < 0.8
    ]
    spec = AlgebraSpec.from_brackets(2 * d + k, d, brackets)
    oracle, lam = sympy_det(spec)
    ours = our_poly_as_sympy(det_polynomial(spec), lam)
    assert (oracle - ours).is_zero


def test_polynomial_matches_exact_determinant_at_rational_points():
    spec = AlgebraSpec.from_brackets(
        7, 2, [(1, 1, [1, "1/2", 0]), (1, 2, [0, 2, -1]), (2, 1, ["-3/2", 0, 1]), (2, 2, [1, 1, 1])]
    )
    poly = det_polynomial(spec)
    rng = np.random.default_rng(3)
    for _ in range(100):
        lam = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-9, 10, 3), rng.integers(1, 7, 3))]
        assert poly.evaluate_exact(lam) == det_exact(b_matrix_exact(spec, lam))


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@settings(max_examples=60, deadline=None)
@given(lam=st.lists(rationals, min_size=2, max_size=2), s=rationals)
def test_homogeneity_exact(lam, s):
    spec = get_preset("rotation6d")
    lhs = det_exact(b_matrix_exact(spec, [s * v for v in lam]))
    assert lhs == s**2 * det_exact(b_matrix_exact(spec, lam))


@settings(max_examples=60, deadline=None)
@given(
    lam=st.lists(st.floats(-3, 3), min_size=2, max_size=2),
    s=st.floats(0.1, 4),
)
def test_homogeneity_float(lam, s):
    spec = get_preset("rotation_alpha")
    a = np.linalg.det(b_matrix(spec, np.multiply(s, lam)))
    b = s**2 * np.linalg.det(b_matrix(spec, lam))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


# --- faithful representation --------------------------------------------------------


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_faithful_rep_identity(name):
    spec = get_preset(name)
    np.testing.assert_array_equal(faithful_rep(spec, 2.0, np.zeros(spec.n)), np.eye(spec.n + 1))


@pytest.mark.parametrize("name", PRESET_NAMES)
@pytest.mark.parametrize("alpha", [math.exp(-1), 0.5, 3.0])
def test_faithful_rep_homomorphism(name, alpha):
    spec = get_preset(name)
    rng = np.random.default_rng(11)
    g, h = rng.uniform(-2, 2, size=(2, 20, spec.n))
    gh = multiply_array(spec, g, h)
    for a, b, ab in zip(g, h, gh):
        lhs = faithful_rep(spec, alpha, ab)
        rhs = faithful_rep(spec, alpha, a) @ faithful_rep(spec, alpha, b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_faithful_rep_is_injective_on_samples():
    spec = get_preset("rotation6d")
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, size=(40, spec.n))
    mats = [faithful_rep(spec, math.exp(-1), p) for p in pts]
    for i in range(len(mats)):
        for j in range(i):
            assert np.max(np.abs(mats[i] - mats[j])) > 1e-8


def printed_rotation_matrix(z, y, x):
    P = np.eye(7)
    P[0, 2:] = [x[0], x[1], -y[0], -y[1], 2 * z[0]]
    P[1, 2:] = [-x[1], x[0], -y[1], y[0], 2 * z[1]]
    P[2:6, 6] = [y[0], y[1], x[0], x[1]]
    return P


@pytest.mark.parametrize("seed", range(4))
def test_faithful_rep_rotation_golden(seed):
    # The displayed matrix is the image of exp(z·Z + y·Y + x·X); in the ordered
    # product coordinates the same point has central part z + w(x, y) / 2.
    spec = get_preset("rotation6d")
    rng = np.random.default_rng(seed)
    z, y, x = rng.uniform(-2, 2, size=(3, 2))
    w = np.einsum("i,ijk,j->k", x, spec.structure, y)
    got = faithful_rep(spec, math.exp(-1), np.concatenate([z + w / 2, y, x]))
    np.testing.assert_allclose(got, printed_rotation_matrix(z, y, x), atol=1e-14)


def test_faithful_rep_golden_row_one_when_central_term_vanishes():
    spec = get_preset("rotation6d")
    z, y, x = np.array([0.4, -0.2]), np.array([0.0, 0.0]), np.array([1.5, -0.5])
    got = faithful_rep(spec, math.exp(-1), np.concatenate([z, y, x]))
    np.testing.assert_allclose(got[0], [1, 0, x[0], x[1], 0, 0, 2 * z[0]], atol=1e-15)


@pytest.mark.parametrize("alpha", [0.0, -1.0, 1.0])
def test_faithful_rep_bad_alpha(alpha):
    with pytest.raises(ValueError):
        faithful_rep(get_preset("heisenberg"), alpha, np.zeros(3))
