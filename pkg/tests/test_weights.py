import itertools

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexlab.exactcore import ONE, ZERO, q_pochhammer
from vertexlab.weights import (
    FusedSpin,
    ModelParams,
    RegimeError,
    VertexState,
    fusion_collapse_oracle,
    phi_beta_binomial,
    phi_nonneg_region,
    six_vertex_weights,
    weight_L,
    weight_L_fused,
    weight_L_fused_row,
    weight_L_row,
    weight_w,
    weight_w_conj,
    yang_baxter_check,
)

Q = mpq(1, 2)
S = mpq(-1, 3)
U = mpq(3, 5)
P = ModelParams.from_qs(Q, S)


def all_states(i_max, j_max=1):
    for i1 in range(i_max + 1):
        for j1 in range(j_max + 1):
            for j2 in range(j_max + 1):
                i2 = i1 + j1 - j2
                if i2 >= 0:
                    yield VertexState(i1, j1, i2, j2)


class TestWeightW:
    def test_empty_vertex(self):
        assert weight_w(P, U, VertexState(0, 0, 0, 0)) == 1

    def test_passing_arrow_at_empty_column(self):
        got = weight_w(P, U, VertexState(0, 1, 0, 1))
        assert got == (U - S) / (1 - S * U)

    def test_emission_blocked_below_zero(self):
        assert weight_w(P, U, VertexState(0, 0, -1, 1)) == 0

    def test_nonconserving_is_zero(self):
        assert weight_w(P, U, VertexState(2, 0, 2, 1)) == 0

    def test_su_one_raises(self):
        bad = ModelParams.from_qs(Q, mpq(1, 4))
        with pytest.raises(RegimeError):
            weight_w(bad, mpq(4), VertexState(1, 0, 1, 0))

    def test_product_mode_refused(self):
        prod = ModelParams.from_q_ssq(Q, mpq(1, 9))
        with pytest.raises(RegimeError):
            weight_w(prod, U, VertexState(0, 0, 0, 0))

    def test_deposit_weight(self):
        # (g,1;g+1,0) carries 1 - q^{g+1} over the common denominator
        g = 2
        got = weight_w(P, U, VertexState(g, 1, g + 1, 0))
        assert got == (1 - Q ** (g + 1)) / (1 - S * U)


class TestWeightWConj:
    def test_equals_plain_on_diagonal(self):
        for g in range(5):
            st_keep = VertexState(g, 0, g, 0)
            st_pass = VertexState(g, 1, g, 1)
            assert weight_w_conj(P, U, st_keep) == weight_w(P, U, st_keep)
            assert weight_w_conj(P, U, st_pass) == weight_w(P, U, st_pass)

    def test_degenerate_spin_raises(self):
        # s^2 = q^{-1} kills (s^2; q)_{i1} for i1 >= 2
        degen = ModelParams.from_qs(mpq(1, 4), mpq(2))
        with pytest.raises(RegimeError):
            weight_w_conj(degen, U, VertexState(3, 0, 2, 1))

    def test_explicit_factor(self):
        state = VertexState(2, 0, 1, 1)
        factor = (
            q_pochhammer(S * S, Q, 1)
            * q_pochhammer(Q, Q, 2)
            / (q_pochhammer(Q, Q, 1) * q_pochhammer(S * S, Q, 2))
        )
        assert weight_w_conj(P, U, state) == factor * weight_w(P, U, state)


class TestWeightL:
    def test_pass_weight(self):
        g = 3
        got = weight_L(P, U, VertexState(g, 1, g, 1))
        assert got == (-S * U + S * S * Q**g) / (1 - S * U)

    def test_row_sum_example(self):
        total = sum(w for _, w in weight_L_row(P, U, 3, 1))
        assert total == 1

    def test_row_sums_all(self):
        for i1 in range(11):
            for j1 in (0, 1):
                assert sum(w for _, w in weight_L_row(P, U, i1, j1)) == 1

    def test_matches_conjugated_weight(self):
        for state in all_states(4):
            want = (-S) ** state.j2 * weight_w_conj(P, U, state)
            assert weight_L(P, U, state) == want

    def test_depends_only_on_product_and_square(self):
        # (q, s, u) and (q, s', u') with su = s'u', s^2 = s'^2 agree
        prod = ModelParams.from_q_ssq(Q, S * S)
        other = ModelParams.from_qs(Q, -S)
        for state in all_states(4):
            ref = weight_L(P, U, state)
            assert weight_L(prod, S * U, state) == ref
            assert weight_L(other, -U, state) == ref

    def test_spin_truncation(self):
        for cap in (1, 2):
            params = ModelParams.from_q_ssq(Q, Q**-cap)
            assert weight_L(params, U, VertexState(cap, 1, cap + 1, 0)) == 0
            row = weight_L_row(params, U, cap, 1)
            assert sum(w for _, w in row) == 1

    @given(
        q=st.fractions(min_value="1/10", max_value="9/10", max_denominator=20),
        s_num=st.integers(min_value=-9, max_value=-1),
        u=st.fractions(min_value="1/10", max_value="5", max_denominator=20),
        i1=st.integers(min_value=0, max_value=6),
        j1=st.integers(min_value=0, max_value=1),
    )
    @settings(max_examples=60, deadline=None)
    def test_row_sum_property(self, q, s_num, u, i1, j1):
        params = ModelParams.from_qs(mpq(q), mpq(s_num, 10))
        assert sum(w for _, w in weight_L_row(params, u, i1, j1)) == 1


class TestFusionOracle:
    """Anchors for the column-collapse construction itself."""

    def test_reduces_to_plain_at_J_one(self):
        for state in all_states(4):
            got = fusion_collapse_oracle(P, 1, U, state.i1, state.j1, state.i2, state.j2)
            assert got == weight_L(P, U, state)

    def test_normalization(self):
        for J in (1, 2, 3):
            for i1 in range(4):
                for j1 in range(J + 1):
                    total = sum(
                        fusion_collapse_oracle(P, J, U, i1, j1, i1 + j1 - j2, j2)
                        for j2 in range(min(J, i1 + j1) + 1)
                    )
                    assert total == 1

    def test_collapse_at_special_spectral_point(self):
        # at u = s the output law is beta-binomial in the incoming stack
        for J in (1, 2, 3):
            spin = FusedSpin.from_J(Q, J)
            for i1 in range(4):
                for j1 in range(J + 1):
                    for j2 in range(min(J, i1 + j1) + 1):
                        got = fusion_collapse_oracle(P, J, S, i1, j1, i1 + j1 - j2, j2)
                        want = (
                            phi_beta_binomial(Q, S * S * spin.qJ, S * S, j2, i1)
                            if j2 <= i1
                            else ZERO
                        )
                        assert got == want


class TestWeightLFused:
    def test_J_one_reduces(self):
        spin = FusedSpin.from_J(Q, 1)
        for state in all_states(5):
            assert weight_L_fused(P, spin, U, state) == weight_L(P, U, state)

    def test_matches_oracle(self):
        for J in (2, 3):
            spin = FusedSpin.from_J(Q, J)
            for i1 in range(6):
                for j1 in range(J + 1):
                    for j2 in range(min(J, i1 + j1) + 1):
                        state = VertexState(i1, j1, i1 + j1 - j2, j2)
                        got = weight_L_fused(P, spin, U, state)
                        want = fusion_collapse_oracle(P, J, U, i1, j1, state.i2, j2)
                        assert got == want, state

    def test_oracle_example_J2(self):
        spin = FusedSpin.from_J(Q, 2)
        state = VertexState(1, 1, 1, 1)
        got = weight_L_fused(P, spin, U, state)
        assert got == fusion_collapse_oracle(P, 2, U, 1, 1, 1, 1)

    def test_special_spectral_point_value(self):
        # at su = s^2 the kernel forgets j1 and becomes phi(j2 | i1)
        spin = FusedSpin.from_J(Q, 2)
        state = VertexState(2, 1, 2, 1)
        got = weight_L_fused(P, spin, S, state)
        assert got == phi_beta_binomial(Q, S * S * spin.qJ, S * S, 1, 2)
        assert weight_L_fused(P, spin, S, VertexState(0, 1, 0, 1)) == 0

    def test_row_sums(self):
        for J in (1, 2, 3, 4):
            spin = FusedSpin.from_J(Q, J)
            for i1 in range(4):
                for j1 in range(J + 1):
                    row = weight_L_fused_row(P, spin, U, i1, j1)
                    assert sum(w for _, w in row) == 1

    def test_product_mode(self):
        spin = FusedSpin.from_J(Q, 2)
        prod = ModelParams.from_q_ssq(Q, S * S)
        for state in all_states(3):
            assert weight_L_fused(prod, spin, S * U, state) == weight_L_fused(
                P, spin, U, state
            )

    def test_generic_spin_value_is_rational(self):
        # qJ off the integer lattice still yields an exact rational
        spin = FusedSpin.from_qJ(mpq(1, 7))
        got = weight_L_fused(P, spin, U, VertexState(2, 1, 2, 1))
        assert isinstance(got, type(ONE))

    def test_capacity_enforced(self):
        spin = FusedSpin.from_J(Q, 2)
        assert weight_L_fused(P, spin, U, VertexState(1, 3, 1, 3)) == 0
        assert weight_L_fused(P, spin, U, VertexState(4, 0, 1, 3)) == 0


class TestPhi:
    def test_trivial(self):
        assert phi_beta_binomial(Q, mpq(1, 4), mpq(1, 8), 0, 0) == 1

    def test_one_step_formula(self):
        nu = mpq(1, 8)
        mu = Q * nu
        for m in (1, 2, 5):
            got = phi_beta_binomial(Q, mu, nu, 1, m)
            assert got == -nu * (1 - Q**m) / (1 - nu)

    def test_sums_to_one_example(self):
        total = sum(phi_beta_binomial(Q, mpq(1, 4), mpq(1, 8), j, 2) for j in range(3))
        assert total == 1

    def test_sums_to_one_grid(self):
        for mu, nu in [(mpq(1, 4), mpq(1, 8)), (mpq(1, 3), mpq(-2)), (mpq(0), mpq(-1))]:
            for m in range(13):
                total = sum(phi_beta_binomial(Q, mu, nu, j, m) for j in range(m + 1))
                assert total == 1, (mu, nu, m)

    def test_mu_zero_safe(self):
        assert phi_beta_binomial(Q, ZERO, mpq(-1), 1, 2) != 0

    def test_infinite_m_reduction(self):
        nu = mpq(-1, 2)
        for J in (0, 1, 3):
            mu = Q**J * nu
            for j in range(J + 1):
                got = phi_beta_binomial(Q, mu, nu, j, "inf")
                want = (
                    mu**j
                    * q_pochhammer(Q**-J, Q, j)
                    / (q_pochhammer(Q, Q, j) * q_pochhammer(nu, Q, J))
                )
                assert got == want
            total = sum(phi_beta_binomial(Q, mu, nu, j, "inf") for j in range(J + 1))
            assert total == 1
            assert phi_beta_binomial(Q, mu, nu, J + 1, "inf") == 0

    def test_infinite_m_unsupported(self):
        with pytest.raises(ValueError):
            phi_beta_binomial(Q, mpq(1, 3), mpq(1, 5), 1, "inf")


class TestPhiNonneg:
    def test_family_probability_params(self):
        assert phi_nonneg_region(Q, mpq(1, 2), mpq(1, 4), 5)

    def test_family_integer_spin(self):
        assert phi_nonneg_region(Q, Q * mpq(-1), mpq(-1), "inf")

    def test_outside_families(self):
        assert not phi_nonneg_region(Q, mpq(2), mpq(1, 4), 1)
        # and the weight really does go negative there
        assert phi_beta_binomial(Q, mpq(2), mpq(1, 4), 0, 1) < 0

    def test_family_q_above_one(self):
        assert phi_nonneg_region(mpq(2), mpq(-1, 2), mpq(-1), 3)

    def test_family_integer_powers(self):
        # mu = q^1, nu = q^2 with 0 <= 1 <= 2
        assert phi_nonneg_region(mpq(1, 3), mpq(1, 3), mpq(1, 9), 4)

    def test_sufficient_only_semantics_hold_on_samples(self):
        cases = [
            (Q, mpq(1, 2), mpq(1, 4), 5),
            (Q, Q * mpq(-1), mpq(-1), 6),
            (mpq(2), mpq(-1, 2), mpq(-1), 3),
            (mpq(1, 3), mpq(1, 3), mpq(1, 9), 4),
        ]
        for q, mu, nu, m in cases:
            assert phi_nonneg_region(q, mu, nu, m)
            for j in range(m + 1):
                assert phi_beta_binomial(q, mu, nu, j, m) >= 0


class TestSixVertex:
    def test_table(self):
        t = mpq(7, 2)
        w = six_vertex_weights(Q, t)
        b1 = (1 - Q * t) / (1 - t)
        b2 = (1 / Q - t) / (1 - t)
        assert w[(0, 0, 0, 0)] == 1
        assert w[(1, 1, 1, 1)] == 1
        assert w[(1, 0, 1, 0)] == b1
        assert w[(1, 0, 0, 1)] == 1 - b1
        assert w[(0, 1, 0, 1)] == b2
        assert w[(0, 1, 1, 0)] == 1 - b2

    def test_solve_for_t(self):
        # b1 = 3/10 at q = 1/2 pins t = 7/2
        w = six_vertex_weights(Q, mpq(7, 2))
        assert w[(1, 0, 1, 0)] == mpq(3, 10)
        assert w[(0, 1, 0, 1)] == mpq(3, 5)

    def test_degenerate_t(self):
        with pytest.raises(RegimeError):
            six_vertex_weights(Q, mpq(1))

    def test_complement_symmetry(self):
        for q, t in [(Q, mpq(7, 2)), (mpq(1, 3), mpq(4)), (mpq(2, 5), mpq(-3, 2))]:
            w = six_vertex_weights(q, t)
            w_flip = six_vertex_weights(1 / q, 1 / t)
            for (i1, j1, i2, j2), val in w.items():
                assert val == w_flip[(1 - i1, 1 - j1, 1 - i2, 1 - j2)]

    def test_is_spin_half_stochastic_weight(self):
        t = mpq(5, 2)
        params = ModelParams.from_q_ssq(Q, 1 / Q)
        w = six_vertex_weights(Q, t)
        for state, val in w.items():
            assert val == weight_L(params, t, VertexState(*state))

    def test_probabilities_in_unit_interval_in_regime(self):
        # t > 1/q keeps every entry in [0, 1]
        for t in (mpq(21, 10), mpq(3), mpq(10)):
            for val in six_vertex_weights(Q, t).values():
                assert 0 <= val <= 1


class TestYangBaxter:
    def test_holds_generic(self):
        assert yang_baxter_check(P, mpq(3, 4), mpq(2, 7), 3, 3)

    def test_holds_other_params(self):
        params = ModelParams.from_qs(mpq(2, 3), mpq(-3, 5))
        assert yang_baxter_check(params, mpq(5), mpq(1, 3), 2, 4)

    def test_singular_crossing_raises(self):
        with pytest.raises(RegimeError):
            yang_baxter_check(P, Q * mpq(2, 7), mpq(2, 7), 1, 1)
        with pytest.raises(RegimeError):
            yang_baxter_check(P, mpq(2, 7), Q * mpq(2, 7), 1, 1)

    def test_negative_control(self):
        # dropping the argument swap on one side must break the identity
        from vertexlab.weights import _mat_mul, _two_vertex_matrix

        u1, u2 = mpq(3, 4), mpq(2, 7)
        q = P.q
        X = [
            [u1 - q * u2, ZERO, ZERO, ZERO],
            [ZERO, q * (u1 - u2), (1 - q) * u1, ZERO],
            [ZERO, (1 - q) * u2, u1 - u2, ZERO],
            [ZERO, ZERO, ZERO, u1 - q * u2],
        ]
        M = _two_vertex_matrix(P, u1, u2, 1, 1, swap=False)
        M_unswapped = _two_vertex_matrix(P, u2, u1, 1, 1, swap=False)
        assert _mat_mul(M_unswapped, X) != _mat_mul(X, M)
