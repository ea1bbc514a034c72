import itertools

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexlab.exactcore import (
    LinearFactorExpression as LFE,
    PoleOrderError,
    Signature,
    as_exact,
    exact_str,
    geometric_poly_tail,
    prod,
    q_binomial,
    q_pochhammer,
    signatures_bounded,
)

from fractions import Fraction

rationals = st.fractions(
    min_value=-4, max_value=4, max_denominator=12
).map(lambda f: mpq(f.numerator, f.denominator))

nonzero_q = st.fractions(
    min_value=Fraction(1, 12), max_value=Fraction(11, 12), max_denominator=12
).map(lambda f: mpq(f.numerator, f.denominator))


class TestScalars:
    def test_parse_forms(self):
        assert as_exact("3/4") == mpq(3, 4)
        assert as_exact("-7") == mpq(-7)
        assert as_exact(5) == mpq(5)

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            as_exact(0.5)

    def test_serialization(self):
        assert exact_str(mpq(-3, 6)) == "-1/2"
        assert exact_str(mpq(8, 4)) == "2"


class TestPochhammer:
    def test_n_zero(self):
        assert q_pochhammer("7/3", "1/2", 0) == 1

    def test_small_product(self):
        assert q_pochhammer("1/2", "1/2", 2) == mpq(3, 8)

    def test_negative_branch(self):
        # (1/3; 1/2)_{-1} = 1 / (1 - (1/3)*2) = 3
        assert q_pochhammer("1/3", "1/2", -1) == 3

    def test_negative_branch_vanishing_factor_raises(self):
        with pytest.raises(ZeroDivisionError):
            q_pochhammer("1/2", "1/2", -1)

    @given(z=rationals, q=nonzero_q, n=st.integers(-5, 5))
    def test_recursion_across_zero(self, z, q, n):
        # (z;q)_{n+1} = (z;q)_n (1 - z q^n) wherever both sides are defined
        try:
            lhs = q_pochhammer(z, q, n + 1)
            rhs = q_pochhammer(z, q, n) * (1 - z * q**n)
        except ZeroDivisionError:
            return
        assert lhs == rhs

    @given(z=rationals, q=nonzero_q, m=st.integers(1, 5))
    def test_negative_inverts_shifted(self, z, q, m):
        try:
            neg = q_pochhammer(z, q, -m)
        except ZeroDivisionError:
            return
        assert neg * q_pochhammer(z * q**-m, q, m) == 1


class TestQBinomial:
    def test_k_zero(self):
        assert q_binomial(6, 0, "2/7") == 1

    def test_two_choose_one(self):
        assert q_binomial(2, 1, "1/2") == mpq(3, 2)

    def test_matches_pochhammer_quotient(self):
        q = mpq(1, 3)
        direct = q_pochhammer(q, q, 4) / (q_pochhammer(q, q, 2) ** 2)
        assert q_binomial(4, 2, q) == direct

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            q_binomial(3, 4, "1/2")

    @given(q=nonzero_q, n=st.integers(0, 8))
    def test_symmetry(self, q, n):
        for k in range(n + 1):
            assert q_binomial(n, k, q) == q_binomial(n, n - k, q)

    def test_normalized_recursion(self):
        # Z_j(J) = q^{j(j-1)/2} binom(J,j)_q satisfies
        # Z_j(J) = q^{J-1} Z_{j-1}(J-1) + Z_j(J-1)
        q = mpq(2, 5)

        def Z(j, J):
            if j < 0 or j > J:
                return mpq(0)
            return q ** (j * (j - 1) // 2) * q_binomial(J, j, q)

        for J in range(1, 7):
            for j in range(J + 1):
                assert Z(j, J) == q ** (J - 1) * Z(j - 1, J - 1) + Z(j, J - 1)

    def test_binary_vector_generating_sum(self):
        # sum over h in {0,1}^J with |h| = j of q^{sum (r-1) h_r}
        # equals q^{j(j-1)/2} binom(J,j)_q
        q = mpq(3, 7)
        for J in range(7):
            acc = {j: mpq(0) for j in range(J + 1)}
            for h in itertools.product((0, 1), repeat=J):
                j = sum(h)
                acc[j] += q ** sum((r) * hr for r, hr in enumerate(h))
            for j in range(J + 1):
                assert acc[j] == q ** (j * (j - 1) // 2) * q_binomial(J, j, q)


class TestSignature:
    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            Signature([1, 2])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Signature([3, -1])

    def test_height_counts(self):
        nu = Signature([5, 5, 2, 0])
        assert nu.height(0) == 4
        assert nu.height(1) == 3
        assert nu.height(3) == 2
        assert nu.height(6) == 0

    def test_weight_and_shift(self):
        mu = Signature([4, 1, 0])
        assert mu.weight() == 5
        assert mu.shifted(2).parts == (6, 3, 2)

    @given(
        st.lists(st.integers(0, 9), min_size=0, max_size=7).map(
            lambda xs: tuple(sorted(xs, reverse=True))
        )
    )
    def test_multiplicity_round_trip(self, parts):
        nu = Signature(parts)
        assert Signature.from_multiplicities(nu.multiplicities()) == nu

    def test_enumeration_count(self):
        # number of nonincreasing tuples in {0..m}^n is binom(n+m, n)
        got = sum(1 for _ in signatures_bounded(3, 4))
        assert got == 35


class TestLinearFactorExpression:
    def test_residue_of_simple_pole(self):
        expr = LFE.factor(1, "w", -2, exponent=-1)
        assert expr.residue_at_simple_pole("w", 2).constant_value() == 1

    def test_residue_with_regular_numerator(self):
        expr = LFE.factor(1, "w", -3) * LFE.factor(1, "w", -2, exponent=-1)
        assert expr.residue_at_simple_pole("w", 2).constant_value() == -1

    def test_residue_keeps_other_variables(self):
        # (w1 - w2) / ((w1 - 2)(w2 - 5)) at w1 = 2 gives (2 - w2)/(w2 - 5)
        expr = (
            LFE.linear({"w1": 1, "w2": -1}, 0)
            * LFE.factor(1, "w1", -2, exponent=-1)
            * LFE.factor(1, "w2", -5, exponent=-1)
        )
        res = expr.residue_at_simple_pole("w1", 2)
        for w2 in (mpq(1), mpq(7, 2), mpq(-3)):
            expected = (2 - w2) / (w2 - 5)
            assert res.evaluate({"w2": w2}) == expected

    def test_nonvanishing_term_contributes_zero(self):
        expr = LFE.factor(1, "w", -4, exponent=-1)
        assert expr.residue_at_simple_pole("w", 2).is_zero()

    def test_double_pole_raises(self):
        expr = LFE.factor(1, "w", -2, exponent=-2)
        with pytest.raises(PoleOrderError):
            expr.residue_at_simple_pole("w", 2)

    def test_split_double_pole_raises(self):
        expr = LFE.factor(1, "w", -2, exponent=-1) * LFE.factor(2, "w", -4, exponent=-1)
        with pytest.raises(PoleOrderError):
            expr.residue_at_simple_pole("w", 2)

    def test_pow_negative(self):
        expr = LFE.factor(2, "w", 1) ** -2
        assert expr.evaluate({"w": mpq(1)}) == mpq(1, 9)

    def test_substitution_hits_pole(self):
        expr = LFE.factor(1, "w", -2, exponent=-1)
        with pytest.raises(ZeroDivisionError):
            expr.substitute("w", 2)

    @given(
        p=st.integers(-3, 3),
        c=st.integers(-3, 3),
        v=st.integers(-6, 6),
    )
    def test_residue_commutes_with_unrelated_substitution(self, p, c, v):
        expr = (
            LFE.linear({"w": 1, "v": 2}, 3)
            * LFE.factor(1, "w", -p, exponent=-1)
            * LFE.factor(1, "v", -c - 10, exponent=-1)
        )
        a = expr.residue_at_simple_pole("w", p).substitute("v", v)
        b = expr.substitute("v", v).residue_at_simple_pole("w", p)
        assert a.constant_value() == b.constant_value()

    def test_residues_sum_to_zero_when_decaying(self):
        # numerator degree <= denominator degree - 2: residues cancel
        poles = [mpq(1), mpq(2), mpq(7, 2), mpq(-4)]
        numer_roots = [mpq(5), mpq(-1, 3)]
        expr = LFE.constant(mpq(9, 4))
        for a in numer_roots:
            expr = expr * LFE.factor(1, "w", -a)
        for p in poles:
            expr = expr * LFE.factor(1, "w", -p, exponent=-1)
        total = sum(
            expr.residue_at_simple_pole("w", p).constant_value() for p in poles
        )
        assert total == 0

    def test_residues_sum_to_leading_ratio_when_degree_minus_one(self):
        # numerator degree = denominator degree - 1: residues sum to the
        # leading-coefficient ratio (minus the residue at infinity)
        poles = [mpq(1), mpq(-2), mpq(5, 3)]
        numer_roots = [mpq(4), mpq(-6)]
        lead = mpq(3, 7)
        expr = LFE.constant(lead)
        for a in numer_roots:
            expr = expr * LFE.factor(1, "w", -a)
        for p in poles:
            expr = expr * LFE.factor(1, "w", -p, exponent=-1)
        total = sum(
            expr.residue_at_simple_pole("w", p).constant_value() for p in poles
        )
        assert total == lead

    def test_degree_bookkeeping(self):
        expr = LFE.factor(1, "w", -1) ** 2 * LFE.factor(1, "w", 3, exponent=-5)
        assert expr.degree("w") == -3

    def test_prod_helper(self):
        assert prod(["1/2", "2/3", 6]) == 2


class TestGeometricPolyTail:
    def test_degree_zero_is_plain_geometric(self):
        rho = mpq(3, 5)
        assert geometric_poly_tail(rho, 0, 0) == 1 / (1 - rho)
        assert geometric_poly_tail(rho, 0, 7) == rho**7 / (1 - rho)

    def test_degree_one_closed_form(self):
        # sum_{W>=0} (W+1) rho^W = 1/(1-rho)^2
        rho = mpq(2, 7)
        assert geometric_poly_tail(rho, 1, 0) == 1 / (1 - rho) ** 2

    @pytest.mark.parametrize("degree,start,chunk", [(2, 0, 5), (4, 5, 9), (3, 2, 1)])
    def test_peeling_off_a_partial_sum(self, degree, start, chunk):
        rho = mpq(3, 7)
        head = sum(
            mpq(w + 1) ** degree * rho**w for w in range(start, start + chunk)
        )
        assert geometric_poly_tail(rho, degree, start) == head + geometric_poly_tail(
            rho, degree, start + chunk
        )

    def test_rho_zero(self):
        assert geometric_poly_tail(0, 3, 0) == 1
        assert geometric_poly_tail(0, 3, 2) == 0

    def test_decreasing_in_start(self):
        rho = mpq(9, 10)
        vals = [geometric_poly_tail(rho, 2, w) for w in range(6)]
        assert all(a > b > 0 for a, b in zip(vals, vals[1:]))

    def test_rejects_divergent_rho(self):
        with pytest.raises(ValueError):
            geometric_poly_tail(mpq(7, 5), 1, 0)
        with pytest.raises(ValueError):
            geometric_poly_tail(-mpq(1, 2), 1, 0)
