import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dual_oracle, least_norm_oracle
from minpert import (
    Bracket,
    RankDeficient,
    VectorNormKind,
    ZeroMatrix,
    dual_certificate,
    dual_max_2norm,
    householder_qr,
    least_norm_solve,
    lower_bound_bracket,
    matrix_lower_bound,
    smallest_singular_value,
)
from minpert.linalg import dual_of, vector_norm


def random_full_row_rank(rng, p=None, m=None):
    p = p or int(rng.integers(1, 5))
    m = m or int(rng.integers(p, 8))
    return rng.standard_normal((p, m))


@st.composite
def wide_matrices(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    p = draw(st.integers(1, 5))
    m = draw(st.integers(p, 8))
    rng = np.random.default_rng(seed)
    return rng.standard_normal((p, m)), rng.standard_normal(p)


class TestNorms:
    def test_aliases(self):
        assert VectorNormKind.coerce("inf") is VectorNormKind.INFINITY
        assert VectorNormKind.coerce("1") is VectorNormKind.ONE
        assert VectorNormKind.coerce(2) is VectorNormKind.TWO

    def test_duals(self):
        assert dual_of("one") is VectorNormKind.INFINITY
        assert dual_of("infinity") is VectorNormKind.ONE
        assert dual_of("two") is VectorNormKind.TWO

    def test_vector_norm(self):
        v = np.array([3.0, -4.0])
        assert vector_norm(v, "one") == 7.0
        assert vector_norm(v, "two") == 5.0
        assert vector_norm(v, "infinity") == 4.0

    def test_unknown(self):
        with pytest.raises(ValueError):
            VectorNormKind.coerce("frobenius")


class TestHouseholderQR:
    def test_reconstructs(self, rng):
        for _ in range(20):
            a = rng.standard_normal((int(rng.integers(1, 9)), 1)) if rng.random() < 0.2 else None
            if a is None:
                rows = int(rng.integers(2, 9))
                a = rng.standard_normal((rows, int(rng.integers(1, rows + 1))))
            q, r = householder_qr(a)
            np.testing.assert_allclose(q @ r, a, atol=1e-13)
            np.testing.assert_allclose(q.T @ q, np.eye(a.shape[1]), atol=1e-13)
            assert np.all(np.diag(r) > 0)
            assert np.allclose(r, np.triu(r))

    def test_matches_numpy_up_to_sign(self, rng):
        a = rng.standard_normal((6, 3))
        q, r = householder_qr(a)
        qn, rn = np.linalg.qr(a)
        signs = np.sign(np.diag(rn))
        np.testing.assert_allclose(r, signs[:, None] * rn, atol=1e-12)
        np.testing.assert_allclose(q, qn * signs, atol=1e-12)

    def test_rank_deficient(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
        with pytest.raises(RankDeficient):
            householder_qr(a)

    def test_rank_deficient_is_linalg_error(self):
        with pytest.raises(np.linalg.LinAlgError):
            householder_qr(np.zeros((3, 1)))


class TestLeastNorm:
    def test_single_equation(self):
        # minimum-norm point on y1 + y2 = 2 is (1, 1)
        z = least_norm_solve(np.array([[1.0, 1.0]]), np.array([2.0]))
        np.testing.assert_allclose(z, [1.0, 1.0])

    def test_square_is_solve(self, rng):
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal(4)
        np.testing.assert_allclose(least_norm_solve(a, b), np.linalg.solve(a, b), rtol=1e-10)

    def test_block_rhs(self, rng):
        a = random_full_row_rank(rng, 3, 6)
        b = rng.standard_normal((3, 5))
        np.testing.assert_allclose(least_norm_solve(a, b), least_norm_oracle(a, b), atol=1e-12)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            least_norm_solve(np.array([[1.0, 1.0], [2.0, 2.0]]), np.array([1.0, 2.0]))

    @settings(max_examples=60, deadline=None)
    @given(wide_matrices())
    def test_matches_pseudoinverse(self, case):
        a, b = case
        z = least_norm_solve(a, b)
        np.testing.assert_allclose(a @ z, b, atol=1e-9 * (1 + np.abs(b).max()))
        np.testing.assert_allclose(z, least_norm_oracle(a, b), atol=1e-9 * (1 + np.linalg.norm(z)))

    @settings(max_examples=60, deadline=None)
    @given(wide_matrices(), st.integers(0, 2**32 - 1))
    def test_minimal_among_solutions(self, case, seed):
        # adding a null-space vector never shortens the solution
        a, b = case
        z = least_norm_solve(a, b)
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(a.shape[1])
        null_part = v - least_norm_oracle(a, a @ v)
        assert np.linalg.norm(z + null_part) >= np.linalg.norm(z) * (1 - 1e-12)


class TestDual:
    def test_closed_form(self):
        # k = diag(2, 4) padded: value is sqrt((s1/2)^2 + (s2/4)^2)
        k = np.array([[2.0, 0.0, 0.0], [0.0, 4.0, 0.0]])
        assert dual_max_2norm(k, np.array([2.0, 4.0])) == pytest.approx(np.sqrt(2.0), rel=1e-15)

    def test_zero_rhs(self):
        k = np.array([[1.0, 2.0]])
        assert dual_max_2norm(k, np.zeros(1)) == 0.0
        assert dual_certificate(k, np.zeros(1)) is None

    @settings(max_examples=60, deadline=None)
    @given(wide_matrices())
    def test_closes_duality(self, case):
        k, s = case
        primal = np.linalg.norm(least_norm_solve(k, s))
        dual = dual_max_2norm(k, s)
        assert dual == pytest.approx(primal, rel=1e-10)
        assert dual == pytest.approx(dual_oracle(k, s), rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(wide_matrices())
    def test_certificate_is_feasible_and_optimal(self, case):
        k, s = case
        u = dual_certificate(k, s)
        assert np.linalg.norm(k.T @ u) == pytest.approx(1.0, rel=1e-10)
        assert u @ s == pytest.approx(dual_max_2norm(k, s), rel=1e-10)

    def test_scaling(self, rng):
        k = random_full_row_rank(rng, 2, 5)
        s = rng.standard_normal(2)
        base = dual_max_2norm(k, s)
        assert dual_max_2norm(k, 3.0 * s) == pytest.approx(3.0 * base, rel=1e-13)
        assert dual_max_2norm(2.0 * k, s) == pytest.approx(base / 2.0, rel=1e-13)


class TestMatrixLowerBound:
    def test_diagonal(self):
        assert matrix_lower_bound(np.diag([3.0, 2.0])) == pytest.approx(2.0, rel=1e-15)

    def test_row(self):
        assert matrix_lower_bound(np.array([[2.0, 0.0]])) == pytest.approx(2.0, rel=1e-15)

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrix):
            matrix_lower_bound(np.zeros((2, 2)))
        with pytest.raises(ZeroMatrix):
            lower_bound_bracket(np.zeros((1, 3)), "one")

    def test_smallest_singular_value(self, rng):
        a = random_full_row_rank(rng, 3, 5)
        oracle = np.sqrt(np.linalg.eigvalsh(a @ a.T).min())
        assert smallest_singular_value(a) == pytest.approx(oracle, rel=1e-10)

    def test_rank_deficient_uses_nonzero_singular_values(self):
        a = np.array([[1.0, 0.0], [1.0, 0.0]])
        assert matrix_lower_bound(a) == pytest.approx(np.sqrt(2.0), rel=1e-14)

    def test_two_norm_bracket(self, rng):
        a = random_full_row_rank(rng, 3, 5)
        br = lower_bound_bracket(a, "two", samples=2000, seed=3)
        assert isinstance(br, Bracket)
        assert smallest_singular_value(a) in br

    def test_diagonal_infinity(self):
        # ||y||_inf / max|y_i / d_i| is minimized at y = e2, giving 2
        br = matrix_lower_bound(np.diag([3.0, 2.0]), "infinity", samples=200)
        assert 2.0 in br
        assert br.hi == pytest.approx(2.0, rel=1e-12)

    def test_diagonal_one(self):
        br = matrix_lower_bound(np.diag([3.0, 2.0]), "one", samples=200)
        assert 2.0 in br
        assert br.hi == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("norm", ["one", "infinity"])
    def test_norm_equivalence_window(self, rng, norm):
        # for a p x m matrix the 1/inf lower bound lies in [sigma/sqrt(k), sigma*sqrt(l)]
        for _ in range(5):
            a = random_full_row_rank(rng, 2, 4)
            p, m = a.shape
            sigma = smallest_singular_value(a)
            br = matrix_lower_bound(a, norm, samples=150, seed=1)
            k, l = (p, m) if norm == "infinity" else (m, p)
            assert br.lo <= br.hi
            assert br.hi >= sigma / np.sqrt(k) * (1 - 1e-9)
            assert br.lo <= sigma * np.sqrt(l) * (1 + 1e-9)

    def test_bracket_is_reproducible(self, rng):
        a = random_full_row_rank(rng, 2, 3)
        assert lower_bound_bracket(a, "infinity", samples=50, seed=9) == \
            lower_bound_bracket(a, "infinity", samples=50, seed=9)
