import math

import numpy as np
import pytest

from mvhyper.hyperfn import (
    HypergeometricParams,
    NoConvergence,
    PoleInParameters,
    RadiusViolation,
    ShiftPoleViolation,
    SymbolSequence,
    eval_nfm,
    eval_shifted_nfm,
    symbol_sequence,
)
from oracles import (
    random_scalar_family,
    scalar_nfm,
    scalar_shifted_nfm,
    scalar_symbol,
)


def scalar_params(a_list, b_list):
    return HypergeometricParams.from_scalars(a_list, b_list)


class TestParams:
    def test_properties(self):
        p = scalar_params([1, 2], [3])
        assert (p.n, p.m, p.dim) == (2, 1, 1)
        assert p.admissible

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            HypergeometricParams([np.eye(2)], [np.eye(3)])

    def test_empty_needs_dim(self):
        with pytest.raises(ValueError, match="dim"):
            HypergeometricParams([], [])
        p = HypergeometricParams([], [], dim=2)
        assert (p.n, p.m, p.dim) == (0, 0, 2)

    def test_pole_recorded_not_silent(self):
        p = scalar_params([1], [-2])
        assert not p.admissible
        rec = p.denominator_poles[0]
        assert rec.denominator_index == 0
        assert rec.step == 2

    def test_matrices_read_only(self):
        p = scalar_params([1], [2])
        with pytest.raises(ValueError):
            p.numerator[0][0, 0] = 5


class TestSymbolSequence:
    def test_first_term_is_identity(self):
        seq = symbol_sequence(scalar_params([1, 1], [2]), count=1)
        assert np.array_equal(seq.term(0), np.eye(1))

    def test_scalar_gauss_term(self):
        # (1)_2 (1)_2 / (2)_2 = (1*2)*(1*2)/(2*3) = 2/3
        seq = symbol_sequence(scalar_params([1, 1], [2]), count=3)
        assert seq.term(2)[0, 0] == pytest.approx(2.0 / 3.0, rel=1e-14)

    def test_diagonal_matches_scalar_symbols(self, rng):
        a1 = np.diag([0.5 + 0.1j, -1.2])
        a2 = np.diag([1.5, 2.0 - 0.3j])
        b1 = np.diag([1.25, 0.75])
        params = HypergeometricParams([a1, a2], [b1])
        seq = symbol_sequence(params, count=8)
        for j in range(8):
            for i in range(2):
                expected = scalar_symbol(
                    [a1[i, i], a2[i, i]], [b1[i, i]], j
                )
                assert seq.term(j)[i, i] == pytest.approx(expected, rel=1e-13)
            assert abs(seq.term(j)[0, 1]) == 0.0

    def test_recurrence_identity_matrices(self, rng):
        # left-multiplying term j+1 by (B_1+p+j)...(B_m+p+j) recovers
        # (A_1+p+j)...(A_n+p+j) term j
        r = 3
        num = [rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)) for _ in range(2)]
        den = [rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)) + 4 * np.eye(r)]
        params = HypergeometricParams(num, den)
        shift = 0.3 - 0.2j
        seq = symbol_sequence(params, shift=shift, count=12)
        eye = np.eye(r)
        for j in range(11):
            c = shift + j
            lhs = seq.term(j + 1)
            for b in reversed(den):
                lhs = (b + c * eye) @ lhs
            rhs = seq.term(j)
            for a in reversed(num):
                rhs = (a + c * eye) @ rhs
            scale = max(1.0, np.linalg.norm(lhs), np.linalg.norm(rhs))
            assert np.linalg.norm(lhs - rhs) <= 1e-12 * scale

    def test_noncommuting_order_is_literal(self, rng):
        # for r > 1 the factor order matters; check one step explicitly
        a1 = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
        a2 = np.array([[1.0, 0.0], [3.0, 1.0]], dtype=complex)
        b1 = np.array([[2.0, 1.0], [0.0, 3.0]], dtype=complex)
        params = HypergeometricParams([a1, a2], [b1])
        seq = symbol_sequence(params, count=2)
        expected = np.linalg.inv(b1) @ a1 @ a2
        assert np.allclose(seq.term(1), expected, atol=1e-14)
        assert not np.allclose(np.linalg.inv(b1) @ a2 @ a1, expected, atol=1e-8)

    def test_pole_range_honoured(self):
        # eigenvalue -5 blocks recursion step 5, i.e. term 6 onwards
        params = scalar_params([1], [-5])
        seq = symbol_sequence(params, count=6)
        assert len(seq) == 6
        with pytest.raises(PoleInParameters) as err:
            symbol_sequence(params, count=7)
        assert err.value.step == 5

    def test_count_validation(self):
        with pytest.raises(ValueError):
            symbol_sequence(scalar_params([1], [2]), count=0)


class TestEval:
    def test_z_zero_is_identity(self):
        res = eval_nfm(scalar_params([1, 1], [2]), 0.0)
        assert np.array_equal(res.value, np.eye(1))
        assert res.terms_used == 1
        assert res.truncation_bound == 0.0
        assert res.converged

    def test_gauss_log_value(self):
        res = eval_nfm(scalar_params([1, 1], [2]), 0.5)
        assert res.value[0, 0] == pytest.approx(2 * math.log(2), rel=1e-12)
        assert res.converged

    def test_binomial_diagonal(self):
        a1, a2 = 0.75 + 0.25j, -1.4
        params = HypergeometricParams([np.diag([a1, a2])], [])
        res = eval_nfm(params, 0.3)
        assert res.value[0, 0] == pytest.approx((1 - 0.3) ** (-a1), rel=1e-12)
        assert res.value[1, 1] == pytest.approx((1 - 0.3) ** (-a2), rel=1e-12)
        assert abs(res.value[0, 1]) == 0.0

    def test_exponential_no_parameters(self):
        params = HypergeometricParams([], [], dim=2)
        res = eval_nfm(params, 1.7 - 0.4j)
        expected = np.exp(1.7 - 0.4j) * np.eye(2)
        assert np.allclose(res.value, expected, rtol=1e-13)

    def test_scalar_consistency_random(self, rng):
        for _ in range(30):
            n = int(rng.integers(0, 4))
            m = int(rng.integers(max(0, n - 1), 3))
            a_list, b_list = random_scalar_family(rng, n, m)
            if n == m + 1:
                z = 0.5 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) / math.sqrt(2)
            else:
                z = rng.uniform(-2, 2) + 1j * rng.uniform(-2, 2)
            got = eval_nfm(scalar_params(a_list, b_list), z).value[0, 0]
            want = scalar_nfm(a_list, b_list, z)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-13)

    def test_diagonal_consistency_random(self, rng):
        for _ in range(10):
            r = int(rng.integers(1, 5))
            n = int(rng.integers(1, 3))
            m = n - 1
            families = [random_scalar_family(rng, n, m) for _ in range(r)]
            num = [
                np.diag([families[i][0][k] for i in range(r)]) for k in range(n)
            ]
            den = [
                np.diag([families[i][1][k] for i in range(r)]) for k in range(m)
            ]
            z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            res = eval_nfm(HypergeometricParams(num, den), z)
            for i in range(r):
                want = scalar_nfm(families[i][0], families[i][1], z)
                assert res.value[i, i] == pytest.approx(want, rel=1e-11, abs=1e-12)

    def test_tirao_term_ratio_diagonal(self):
        # with n=2, m=1 the symbol obeys the classical Gauss ratio
        a = np.diag([0.6, 1.1])
        b = np.diag([1.3, 0.9])
        c = np.diag([1.7, 2.4])
        params = HypergeometricParams([a, b], [c])
        seq = symbol_sequence(params, count=10)
        eye = np.eye(2)
        for j in range(9):
            ratio = np.linalg.inv(c + j * eye) @ (a + j * eye) @ (b + j * eye)
            assert np.allclose(seq.term(j + 1), ratio @ seq.term(j), rtol=1e-13)

    def test_monotone_truncation(self):
        params = scalar_params([0.9, 1.2], [1.8])
        used = [
            eval_nfm(params, 0.45, tol=tol).terms_used
            for tol in (1e-4, 1e-6, 1e-8, 1e-10, 1e-12)
        ]
        assert used == sorted(used)

    def test_converged_bound_invariant(self, rng):
        for _ in range(10):
            a_list, b_list = random_scalar_family(rng, 2, 1)
            tol = 10.0 ** -rng.integers(6, 13)
            res = eval_nfm(scalar_params(a_list, b_list), 0.4, tol=tol)
            assert res.converged
            limit = tol * max(1.0, np.linalg.norm(res.value, 2))
            assert res.truncation_bound <= limit

    def test_pole_raises(self):
        with pytest.raises(PoleInParameters):
            eval_nfm(scalar_params([1, 1], [0]), 0.2)
        with pytest.raises(PoleInParameters):
            eval_nfm(scalar_params([1, 1], [-2]), 0.2)

    def test_radius_violation_unit_disk(self):
        params = scalar_params([1, 1], [5])
        with pytest.raises(RadiusViolation):
            eval_nfm(params, 1.0)
        with pytest.raises(RadiusViolation):
            eval_nfm(params, 1.2, allow_boundary=True)
        res = eval_nfm(params, 1.0, allow_boundary=True)
        assert res.value[0, 0] == pytest.approx(4.0 / 3.0, rel=1e-10)

    def test_radius_violation_divergent(self):
        params = scalar_params([1, 1, 1], [2])
        with pytest.raises(RadiusViolation):
            eval_nfm(params, 0.1)
        res = eval_nfm(params, 0.0)
        assert np.array_equal(res.value, np.eye(1))

    def test_entire_far_from_origin(self):
        params = scalar_params([1.1], [2.3])
        res = eval_nfm(params, 8.0)
        want = scalar_nfm([1.1], [2.3], 8.0)
        assert res.value[0, 0] == pytest.approx(want, rel=1e-12)

    def test_no_convergence(self):
        params = scalar_params([1, 1], [2])
        with pytest.raises(NoConvergence) as err:
            eval_nfm(params, 0.99, max_terms=50)
        partial = err.value.result
        assert not partial.converged
        assert partial.terms_used == 50

    def test_symbol_cache_reuse(self):
        params = scalar_params([1, 1], [2])
        seq = SymbolSequence(params)
        r1 = eval_nfm(params, 0.5, symbols=seq)
        cached = len(seq)
        r2 = eval_nfm(params, 0.25, symbols=seq)
        assert len(seq) >= cached
        assert r1.value[0, 0] == pytest.approx(2 * math.log(2), rel=1e-12)
        assert r2.value[0, 0] == pytest.approx(scalar_nfm([1, 1], [2], 0.25), rel=1e-12)

    def test_symbol_cache_mismatch(self):
        params = scalar_params([1, 1], [2])
        other = SymbolSequence(params, shift=0.5)
        with pytest.raises(ValueError):
            eval_nfm(params, 0.5, symbols=other)


class TestShiftedEval:
    def test_p_zero_bit_identical(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(max(0, n - 1), 3))
            a_list, b_list = random_scalar_family(rng, n, m)
            z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            params = scalar_params(a_list, b_list)
            plain = eval_nfm(params, z)
            shifted = eval_shifted_nfm(params, 0.0, z)
            assert np.array_equal(plain.value, shifted.value)
            assert plain.terms_used == shifted.terms_used
            assert plain.truncation_bound == shifted.truncation_bound

    def test_z_zero(self):
        res = eval_shifted_nfm(scalar_params([1, 1], [2]), 0.5, 0.0)
        assert np.array_equal(res.value, np.eye(1))

    def test_scalar_shifted_oracle(self):
        # a=b=c=1, p=1/2: the shifted weights cancel and the series is
        # geometric, summing to 1/(1-z)
        params = scalar_params([1, 1], [1])
        res = eval_shifted_nfm(params, 0.5, 0.25)
        want = scalar_shifted_nfm([1, 1], [1], 0.5, 0.25)
        assert res.value[0, 0] == pytest.approx(want, rel=1e-12)
        assert res.value[0, 0] == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_scalar_shifted_random(self, rng):
        for _ in range(10):
            a_list, b_list = random_scalar_family(rng, 2, 1)
            p = complex(rng.uniform(0.1, 1.2), rng.uniform(-0.4, 0.4))
            z = complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4))
            params = scalar_params(a_list, b_list)
            got = eval_shifted_nfm(params, p, z).value[0, 0]
            want = scalar_shifted_nfm(a_list, b_list, p, z)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-13)

    def test_shift_pole_spectrum_clause(self):
        params = scalar_params([1, 1], [0.6])
        with pytest.raises(ShiftPoleViolation) as err:
            eval_shifted_nfm(params, -1.6, 0.2)
        assert err.value.clause == "denominator_spectrum"

    def test_shift_pole_positive_integer_clause(self):
        params = scalar_params([1, 1], [0.6])
        with pytest.raises(ShiftPoleViolation) as err:
            eval_shifted_nfm(params, -3.0, 0.2)
        assert err.value.clause == "positive_integers"

    def test_shifted_allows_inadmissible_base_family(self):
        # the unshifted family has a pole (eigenvalue 0) but shifting by
        # p = 0.5 clears the whole forbidden set
        params = scalar_params([1, 1], [0])
        assert not params.admissible
        res = eval_shifted_nfm(params, 0.5, 0.2)
        want = scalar_shifted_nfm([1, 1], [0], 0.5, 0.2)
        assert res.value[0, 0] == pytest.approx(want, rel=1e-12)
