import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqsd import (
    EpmVerdict,
    StateEnsemble,
    ValidationError,
    build_sdp,
    compute_epm,
    epm_analysis,
    epm_certificate,
    epm_test_lp,
    epm_test_nondegenerate,
    epm_test_spectral,
    gram_power,
    priors_for_epm,
    reciprocal_states,
    solve,
    verify_certificate,
)

from helpers import (
    cyclic_profile_ensemble,
    random_ensemble,
    sign_group_elements,
    sign_group_generator,
)


@pytest.fixture(scope="module")
def sign_group_ensemble():
    cols = [u @ sign_group_generator() for u in sign_group_elements()]
    return StateEnsemble(np.column_stack(cols), np.full(4, 0.25))


class TestAnalysis:
    def test_three_state_spectrum(self, three_states_reciprocals):
        analysis = epm_analysis(three_states_reciprocals)
        # Smallest squared singular value prints as 0.07 and is simple.
        assert abs(analysis.p - 0.07) <= 5e-3
        assert analysis.s == 1
        assert analysis.q == 3

    def test_sign_group_spectrum(self, sign_group_ensemble):
        rs = reciprocal_states(sign_group_ensemble)
        analysis = epm_analysis(rs)
        assert analysis.p == pytest.approx(2 / 9, abs=1e-10)
        assert analysis.s == 1
        assert analysis.q == 3
        # Frame operator is (2/9) diag(4, 4, 1, 9).
        frame = sign_group_ensemble.states @ sign_group_ensemble.states.conj().T
        assert np.allclose(frame, (2 / 9) * np.diag([4.0, 4.0, 1.0, 9.0]), atol=1e-12)
        assert np.allclose(
            np.sort(analysis.distinct_values**2), [2 / 9, 8 / 9, 2.0], atol=1e-12
        )

    def test_degenerate_grouping(self, rng):
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng)
        analysis = epm_analysis(reciprocal_states(e))
        assert analysis.s == 2
        assert analysis.q == 3
        assert int(analysis.multiplicities.sum()) == 4

    def test_last_rows_columns_bounded(self, rng):
        e = cyclic_profile_ensemble([0.7, 0.5, 0.4, 0.4, 0.4], rng)
        analysis = epm_analysis(reciprocal_states(e))
        assert analysis.last_rows.shape == (3, 5)
        assert np.all(analysis.last_rows.sum(axis=0) <= 1.0 + 1e-12)


class TestComputeEpm:
    def test_sign_group_probability(self, sign_group_ensemble):
        rs = reciprocal_states(sign_group_ensemble)
        meas = compute_epm(sign_group_ensemble, rs)
        assert np.max(np.abs(meas.probs - 2 / 9)) <= 1e-10

    def test_three_state_probability(self, three_states_uniform, three_states_reciprocals):
        meas = compute_epm(three_states_uniform, three_states_reciprocals)
        assert np.max(np.abs(meas.probs - 0.07)) <= 5e-3

    def test_orthonormal(self, orthonormal_ensemble):
        rs = reciprocal_states(orthonormal_ensemble)
        meas = compute_epm(orthonormal_ensemble, rs)
        assert np.allclose(meas.probs, 1.0, atol=1e-12)
        for i in range(3):
            proj = np.outer(orthonormal_ensemble.states[:, i],
                            orthonormal_ensemble.states[:, i].conj())
            assert np.allclose(meas.operators[i], proj, atol=1e-12)

    def test_equal_detection_probabilities(self, rng):
        e = random_ensemble(rng, 6, 4)
        rs = reciprocal_states(e)
        meas = compute_epm(e, rs)
        for i in range(4):
            born = np.real(e.states[:, i].conj() @ meas.operators[i] @ e.states[:, i])
            assert abs(born - rs.sigma[-1] ** 2) <= 1e-10

    def test_saturates_identity(self, rng):
        e = random_ensemble(rng, 5, 3)
        rs = reciprocal_states(e)
        meas = compute_epm(e, rs)
        lam = np.linalg.eigvalsh(meas.operators.sum(axis=0))[-1]
        assert abs(lam - 1.0) <= 1e-10


class TestNondegenerateTest:
    def test_matched_priors_optimal(self, three_states_weighted):
        rs = reciprocal_states(three_states_weighted)
        result = epm_test_nondegenerate(three_states_weighted, rs)
        assert result.verdict is EpmVerdict.OPTIMAL
        assert result.residual <= 1e-8

    def test_uniform_priors_not_optimal(self, three_states_uniform, three_states_reciprocals):
        result = epm_test_nondegenerate(three_states_uniform, three_states_reciprocals)
        assert result.verdict is EpmVerdict.NOT_OPTIMAL

    def test_constructed_match_is_optimal(self, rng):
        e = random_ensemble(rng, 5, 4)
        rs = reciprocal_states(e)
        priors = np.abs(rs.vh[-1, :]) ** 2
        matched = StateEnsemble(e.states, priors)
        rs2 = reciprocal_states(matched)
        assert epm_test_nondegenerate(matched, rs2).verdict is EpmVerdict.OPTIMAL

    def test_degenerate_input_raises(self, rng):
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng)
        rs = reciprocal_states(e)
        with pytest.raises(ValidationError, match="epm_test_lp"):
            epm_test_nondegenerate(e, rs)


class TestLpTest:
    def test_sign_group_uniform_feasible(self, sign_group_ensemble):
        # Multiplicity is one here, so the test reduces to the exact row
        # comparison; symmetry makes the squared last row uniform.
        rs = reciprocal_states(sign_group_ensemble)
        analysis = epm_analysis(rs)
        assert analysis.s == 1
        assert np.allclose(analysis.last_rows[0], 0.25, atol=1e-10)
        result = epm_test_lp(sign_group_ensemble, rs)
        assert result.verdict is EpmVerdict.OPTIMAL
        assert np.allclose(result.b, [1.0])

    def test_degenerate_uniform_feasible(self, rng):
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng)
        rs = reciprocal_states(e)
        result = epm_test_lp(e, rs)
        assert result.verdict is EpmVerdict.OPTIMAL
        assert result.b is not None and np.min(result.b) >= 0.0
        m_sys = epm_analysis(rs).last_rows.T
        assert np.max(np.abs(m_sys @ result.b - e.priors)) <= 1e-8

    def test_degenerate_random_priors_inconclusive(self, rng):
        priors = rng.uniform(0.5, 1.5, 4)
        priors /= priors.sum()
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng, priors)
        rs = reciprocal_states(e)
        result = epm_test_lp(e, rs)
        assert result.verdict is EpmVerdict.INCONCLUSIVE
        assert result.residual > 1e-8

    def test_nondegenerate_mismatch_is_not_optimal(self, three_states_uniform,
                                                   three_states_reciprocals):
        result = epm_test_lp(three_states_uniform, three_states_reciprocals)
        assert result.verdict is EpmVerdict.NOT_OPTIMAL

    def test_agreement_with_exact_test(self, rng):
        for _ in range(10):
            e = random_ensemble(rng, 5, 3)
            rs = reciprocal_states(e)
            exact = epm_test_nondegenerate(e, rs)
            lp = epm_test_lp(e, rs)
            assert exact.verdict is lp.verdict

    def test_roundtrip_with_generated_priors(self, rng):
        e = random_ensemble(rng, 6, 4)
        rs = reciprocal_states(e)
        priors = priors_for_epm(rs, np.array([1.0]))
        boosted = StateEnsemble(e.states, priors)
        rs2 = reciprocal_states(boosted)
        assert epm_test_lp(boosted, rs2).verdict is EpmVerdict.OPTIMAL


class TestPriorsForEpm:
    def test_reproduces_printed_weighted_priors(self, three_states_reciprocals):
        priors = priors_for_epm(three_states_reciprocals, np.array([1.0]))
        # Printed to one or two figures as (0.6, 0.2, 0.2); the exact values
        # are (0.6058, 0.1971, 0.1971).
        assert np.max(np.abs(priors - np.array([0.6, 0.2, 0.2]))) <= 6e-3
        assert np.allclose(priors, np.abs(three_states_reciprocals.vh[-1, :]) ** 2)

    def test_single_coordinate_weight(self, rng):
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng)
        rs = reciprocal_states(e)
        priors = priors_for_epm(rs, np.array([1.0, 0.0]))
        assert np.allclose(priors, epm_analysis(rs).last_rows[0], atol=1e-14)

    def test_validation(self, three_states_reciprocals):
        with pytest.raises(ValidationError, match="length"):
            priors_for_epm(three_states_reciprocals, np.array([0.5, 0.5]))
        with pytest.raises(ValidationError, match="nonnegative"):
            priors_for_epm(three_states_reciprocals, np.array([-1.0]))
        with pytest.raises(ValidationError, match="sum to 1"):
            priors_for_epm(three_states_reciprocals, np.array([0.5]))

    def test_full_certificate_roundtrip(self, rng):
        for _ in range(5):
            e = random_ensemble(rng, 5, 4)
            rs = reciprocal_states(e)
            priors = priors_for_epm(rs, np.array([1.0]))
            boosted = StateEnsemble(e.states, priors)
            rs2 = reciprocal_states(boosted)
            meas = compute_epm(boosted, rs2)
            result = epm_test_lp(boosted, rs2)
            cert = epm_certificate(rs2, result.b)
            assert verify_certificate(boosted, rs2, meas.probs, cert).passed


class TestSpectralTest:
    def test_sign_group_optimal(self, sign_group_ensemble):
        result = epm_test_spectral(sign_group_ensemble)
        assert result.verdict is EpmVerdict.OPTIMAL
        assert result.a_t is not None and result.a_t.shape == (3,)

    def test_symmetric_orbit_optimal(self, rng):
        e = cyclic_profile_ensemble([0.7, 0.5, 0.4, 0.3, 0.25], rng)
        assert epm_test_spectral(e).verdict is EpmVerdict.OPTIMAL

    def test_generic_uniform_inconclusive_and_suboptimal(self, rng):
        e = StateEnsemble(random_ensemble(rng, 5, 3).states, np.full(3, 1 / 3))
        rs = reciprocal_states(e)
        result = epm_test_spectral(e, rs)
        assert result.verdict is EpmVerdict.INCONCLUSIVE
        # The solver confirms the EPM is strictly suboptimal here.
        report = solve(build_sdp(e, rs))
        assert -report.primal_value > rs.sigma[-1] ** 2 + 1e-6

    def test_unit_moment_anchor(self, rng):
        # Exponent zero on the support reproduces unit state norms.
        e = random_ensemble(rng, 6, 4)
        rs = reciprocal_states(e)
        power = gram_power(rs, 0.0)
        moments = np.einsum("ri,rs,si->i", e.states.conj(), power, e.states).real
        assert np.max(np.abs(moments - 1.0)) <= 1e-12

    def test_gram_power_consistency(self, rng):
        # G^(-1/2) maps the states onto the paired left singular vectors.
        e = random_ensemble(rng, 5, 3)
        rs = reciprocal_states(e)
        mapped = gram_power(rs, -0.5) @ e.states
        assert np.max(np.abs(mapped - rs.u[:, :3] @ rs.vh)) <= 1e-10

    def test_certificate_when_spectral_optimal(self, rng):
        e = cyclic_profile_ensemble([0.75, 0.5, 0.35, 0.35], rng)
        rs = reciprocal_states(e)
        assert epm_test_spectral(e, rs).verdict is EpmVerdict.OPTIMAL
        lp = epm_test_lp(e, rs)
        cert = epm_certificate(rs, lp.b)
        meas = compute_epm(e, rs)
        assert verify_certificate(e, rs, meas.probs, cert).passed


class TestCrossModuleConsistency:
    def test_optimal_epm_matches_solver_value(self, rng):
        # Whenever a test declares the EPM optimal, the SDP optimum equals
        # the common detection probability.
        for _ in range(5):
            e0 = random_ensemble(rng, 5, 3)
            rs0 = reciprocal_states(e0)
            priors = priors_for_epm(rs0, np.array([1.0]))
            e = StateEnsemble(e0.states, priors)
            rs = reciprocal_states(e)
            assert epm_test_lp(e, rs).verdict is EpmVerdict.OPTIMAL
            report = solve(build_sdp(e, rs))
            assert abs(-report.primal_value - rs.sigma[-1] ** 2) <= 1e-6

    def test_spectral_optimal_implies_certificate_on_gu_orbits(self, rng):
        # Spectral verdict Optimal implies a passing certificate, checked
        # on 50 random symmetric orbits.
        for trial in range(50):
            m = int(rng.integers(3, 7))
            profile = rng.uniform(0.3, 1.0, m)
            e = cyclic_profile_ensemble(profile, rng)
            rs = reciprocal_states(e)
            result = epm_test_spectral(e, rs)
            assert result.verdict is EpmVerdict.OPTIMAL
            lp = epm_test_lp(e, rs)
            assert lp.b is not None
            cert = epm_certificate(rs, lp.b)
            meas = compute_epm(e, rs)
            assert verify_certificate(e, rs, meas.probs, cert).passed


class TestEpmCertificate:
    def test_weighted_three_state_scalar(self, three_states_weighted):
        rs = reciprocal_states(three_states_weighted)
        cert = epm_certificate(rs, np.array([1.0]))
        top = np.linalg.eigvalsh(cert.X)[-1]
        # The certificate weight reproduces the printed 0.07.
        assert abs(top - 0.07) <= 5e-3
        meas = compute_epm(three_states_weighted, rs)
        ver = verify_certificate(three_states_weighted, rs, meas.probs, cert)
        assert ver.passed

    def test_rank_matches_witness_support(self, rng):
        e = cyclic_profile_ensemble([0.8, 0.45, 0.3, 0.3], rng)
        rs = reciprocal_states(e)
        cert = epm_certificate(rs, np.array([0.5, 0.5]))
        assert np.linalg.matrix_rank(cert.X, tol=1e-10) == 2


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    raw=st.lists(st.floats(0.01, 1.0), min_size=1, max_size=4),
)
def test_priors_for_epm_is_probability_vector(seed, raw):
    rng = np.random.default_rng(seed)
    e = random_ensemble(rng, 5, int(rng.integers(2, 5)))
    rs = reciprocal_states(e)
    s = epm_analysis(rs).s
    b = np.resize(np.array(raw), s)
    b /= b.sum()
    priors = priors_for_epm(rs, b)
    assert np.min(priors) >= 0.0
    assert abs(priors.sum() - 1.0) <= 1e-10
