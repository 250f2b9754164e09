import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_jacobian
from minpert import (
    BUILTIN_NAMES,
    Anchor,
    DimensionMismatch,
    ParameterizedSystem,
    ParseError,
    PolyTerm,
    UnknownBuiltin,
    builtin,
    check_hypotheses,
    parse_problem,
    parse_system,
    random_system,
    serialize_system,
)


def test_parse_circle():
    sys = parse_system("eq: y1^2 + y2^2 - x1", m=2, n=1)
    assert (sys.m, sys.n, sys.p) == (2, 1, 1)
    assert sys([1.0, 0.0], [1.0])[0] == 0.0
    assert sys([2.0, 1.0], [0.5])[0] == pytest.approx(4.5)


def test_parse_implicit_and_explicit_products():
    a = parse_system("eq: 2 y1 x1 - 3*y2^2 + 0.5", m=2, n=1)
    y, x = np.array([0.3, -1.2]), np.array([0.7])
    assert a(y, x)[0] == pytest.approx(2 * 0.3 * 0.7 - 3 * 1.44 + 0.5)


def test_repeated_variable_powers_add():
    sys = parse_system("eq: y1 y1^2 x1 x1", m=1, n=1)
    assert sys([2.0], [3.0])[0] == pytest.approx(8.0 * 9.0)


def test_parse_problem_reads_anchor_and_comments():
    text = """
    # a comment
    dims m=2 n=1 p=1
    anchor y0=(1,0) x0=(1)
    name: unit
    eq: y1^2 + y2^2 - x1
    """
    sys, anchor = parse_problem(text)
    assert sys.name == "unit"
    np.testing.assert_array_equal(anchor.y0, [1.0, 0.0])
    np.testing.assert_array_equal(anchor.x0, [1.0])


def test_dims_inferred_from_indices():
    sys = parse_system("eq: y3 + x2")
    assert (sys.m, sys.n) == (3, 2)


@pytest.mark.parametrize(
    "text, column",
    [
        ("eq: y1^", 7),
        ("eq: y1 + + 2", 10),
        ("eq: y1 + z1", 10),
        ("eq: y0 + 1", 5),
    ],
)
def test_parse_error_column(text, column):
    with pytest.raises(ParseError) as info:
        parse_system(text, m=1, n=1)
    assert info.value.line == 1
    assert info.value.column == column


def test_parse_error_line_number():
    with pytest.raises(ParseError) as info:
        parse_problem("dims m=1 n=1 p=2\neq: y1\neq: x1 ^ 2 +")
    assert info.value.line == 3


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        parse_system("eq: 1 +", m=1, n=1)


def test_degree_cap():
    with pytest.raises(ParseError):
        parse_system("eq: y1^7", m=1, n=1)
    assert parse_system("eq: y1^7", m=1, n=1, degree_cap=7).p == 1


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        parse_problem("dims m=1 n=1 p=1\neq: y2")
    with pytest.raises(DimensionMismatch):
        parse_problem("dims m=1 n=1 p=2\neq: y1")
    with pytest.raises(DimensionMismatch):
        parse_problem("dims m=2 n=1 p=1\nanchor y0=(1) x0=(1)\neq: y1")
    with pytest.raises(DimensionMismatch):
        ParameterizedSystem(2, 1, 1, ((PolyTerm(1.0, (1,), (0,)),),))


def test_evaluation_shapes():
    sys, _ = builtin("linear2x3")
    with pytest.raises(DimensionMismatch):
        sys([1.0, 2.0], [0.0, 0.0])
    batch = sys(np.zeros((4, 5, 3)), np.zeros(2))
    assert batch.shape == (4, 5, 2)


def test_exact_jacobians_circle():
    sys, _ = builtin("circle")
    np.testing.assert_array_equal(sys.jacobian_y([1.0, 0.5], [2.0]), [[2.0, 1.0]])
    np.testing.assert_array_equal(sys.jacobian_x([1.0, 0.5], [2.0]), [[-1.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_jacobians_match_finite_differences(seed, m, n, p):
    rng = np.random.default_rng(seed)
    p = min(p, m)
    sys, _ = random_system(rng, m, n, p, degree=3)
    y = rng.uniform(-1, 1, m)
    x = rng.uniform(-1, 1, n)
    scale = 1 + np.abs(sys.jacobian_y(y, x)).max() + np.abs(sys.jacobian_x(y, x)).max()
    np.testing.assert_allclose(sys.jacobian_y(y, x), fd_jacobian(lambda v: sys(v, x), y), atol=1e-6 * scale)
    np.testing.assert_allclose(sys.jacobian_x(y, x), fd_jacobian(lambda v: sys(y, v), x), atol=1e-6 * scale)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 3), st.integers(1, 3))
def test_serialize_round_trip(seed, m, n, p):
    rng = np.random.default_rng(seed)
    sys, anchor = random_system(rng, m, n, min(p, m))
    again, anchor2 = parse_problem(serialize_system(sys, anchor))
    assert again.canonical_equal(sys)
    np.testing.assert_array_equal(anchor2.y0, anchor.y0)
    np.testing.assert_array_equal(anchor2.x0, anchor.x0)


def test_canonical_merges_and_drops_terms():
    a = parse_system("eq: y1 + y1 - 2 y1 + x1", m=1, n=1)
    b = parse_system("eq: x1", m=1, n=1)
    assert a.canonical_equal(b)


def test_random_system_anchor_is_root(rng):
    for _ in range(10):
        sys, anchor = random_system(rng, 4, 2, 3)
        assert check_hypotheses(sys, anchor).usable


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_satisfy_hypotheses(name):
    sys, anchor = builtin(name)
    report = check_hypotheses(sys, anchor)
    assert report.residual_norm == 0.0
    assert report.h5_onto and report.h6_one_to_one


def test_unknown_builtin():
    with pytest.raises(UnknownBuiltin):
        builtin("torus")
    with pytest.raises(KeyError):
        builtin("torus")


def test_dead_parameter_breaks_one_to_one():
    sys, anchor = builtin("circle")
    wide = sys.with_parameters(2)
    report = check_hypotheses(wide, Anchor(anchor.y0, [1.0, 0.0]))
    assert report.h5_onto
    assert not report.h6_one_to_one
    assert report.rank_J0 == 1


def test_hypothesis_report_flags_non_root():
    sys, _ = builtin("circle")
    report = check_hypotheses(sys, Anchor([1.0, 0.0], [2.0]))
    assert not report.is_root
    assert report.residual_norm == pytest.approx(1.0)


def test_hypothesis_report_flags_singular_k0():
    # grad of y1^2 + y2^2 vanishes at the origin
    sys = parse_system("eq: y1^2 + y2^2 - x1", m=2, n=1)
    report = check_hypotheses(sys, Anchor([0.0, 0.0], [0.0]))
    assert report.is_root and not report.h5_onto


def _scaled_fd(fun, z):
    z = np.asarray(z, dtype=float)
    cols = []
    for j in range(z.size):
        h = 1e-6 * (1 + abs(z[j]))
        e = np.zeros_like(z)
        e[j] = h
        cols.append((fun(z + e) - fun(z - e)) / (2 * h))
    return np.column_stack(cols)


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtin_jacobians_on_random_points(name):
    sys, anchor = builtin(name)
    rng = np.random.default_rng(len(name))
    for _ in range(100):
        y = anchor.y0 + rng.uniform(-1, 1, sys.m)
        x = anchor.x0 + rng.uniform(-1, 1, sys.n)
        for exact, fd in ((sys.jacobian_y(y, x), _scaled_fd(lambda v: sys(v, x), y)),
                          (sys.jacobian_x(y, x), _scaled_fd(lambda v: sys(y, v), x))):
            np.testing.assert_allclose(fd, exact, rtol=1e-5, atol=1e-5 * np.abs(exact).max())
