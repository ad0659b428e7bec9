from itertools import permutations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qbcsim import protocol as pr
from qbcsim import qudits as q


class TestResourceBranch:
    def test_d2_label_zero(self):
        # (|000>|0> + |111>|1>)/sqrt(2)
        amps = pr.resource_branch(0, 2).amplitudes
        expected = np.zeros(16, complex)
        expected[0] = expected[15] = 1 / np.sqrt(2)
        assert_allclose(amps, expected, atol=1e-12)

    def test_d2_label_one(self):
        # (|000>|1> - |111>|0>)/sqrt(2): the shifted index wraps to 0 and
        # the phase on j=1 is omega = -1.
        amps = pr.resource_branch(1, 2).amplitudes
        expected = np.zeros(16, complex)
        expected[1] = 1 / np.sqrt(2)
        expected[14] = -1 / np.sqrt(2)
        assert_allclose(amps, expected, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_branches_are_orthonormal(self, d):
        stacked = np.stack([pr.resource_branch(l, d).amplitudes for l in range(d)])
        assert_allclose(stacked.conj() @ stacked.T, np.eye(d), atol=1e-9)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            pr.resource_branch(2, 2)


class TestResourceState:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_normalized_five_factors(self, d):
        state = pr.resource_state(d)
        assert state.shape.factor_dims == (d,) * 5
        assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-9

    def test_ancilla_contraction_gives_branches(self):
        d = 3
        blocks = pr.resource_state(d).amplitudes.reshape(d, d**4)
        for l in range(d):
            assert_allclose(blocks[l],
                            pr.resource_branch(l, d).amplitudes / np.sqrt(d),
                            atol=1e-12)

    def test_ancilla_reduction_maximally_mixed(self):
        red = q.reduced_state(pr.resource_state(2), keep=(0,))
        assert_allclose(red.entries, np.eye(2) / 2, atol=1e-9)


class TestPostCommitState:
    def test_bit1_is_selected_branch(self):
        params = pr.ProtocolParams(2)
        assert_allclose(
            pr.post_commit_state(params, 1, (0, 1), 0).amplitudes,
            pr.resource_branch(0, 2).amplitudes,
            atol=1e-12,
        )

    def test_bit0_identity_perm_outcome_zero(self):
        # All phases are 1: uniform superposition of the two branches.
        params = pr.ProtocolParams(2)
        expected = (pr.resource_branch(0, 2).amplitudes
                    + pr.resource_branch(1, 2).amplitudes) / np.sqrt(2)
        assert_allclose(pr.post_commit_state(params, 0, (0, 1), 0).amplitudes,
                        expected, atol=1e-12)

    def test_family_is_orthonormal_basis(self):
        params = pr.ProtocolParams(4)
        perm = (2, 0, 3, 1)
        for bit in (0, 1):
            stacked = np.stack([
                pr.post_commit_state(params, bit, perm, m).amplitudes
                for m in range(4)
            ])
            assert_allclose(stacked.conj() @ stacked.T, np.eye(4), atol=1e-9)

    @pytest.mark.parametrize("d", [2, 3])
    def test_hiding_reduction(self, d):
        params = pr.ProtocolParams(d)
        for perm in permutations(range(d)):
            for bit in (0, 1):
                for m in range(d):
                    state = pr.post_commit_state(params, bit, perm, m)
                    red = q.reduced_state(state, keep=(pr.BOB_FACTOR,))
                    assert float(np.max(np.abs(red.entries - np.eye(d) / d))) <= 1e-9


class TestCommit:
    def test_outcome_distribution_uniform(self):
        # Born weights are uniform; check 1e4 samples against the
        # 3-sigma multinomial envelope.
        d = 3
        params = pr.ProtocolParams(d)
        rng = np.random.default_rng(101)
        n = 10_000
        for bit in (0, 1):
            counts = np.zeros(d)
            for _ in range(n):
                counts[pr.commit(params, bit, (1, 2, 0), rng).outcome] += 1
            sigma = np.sqrt(n * (1 / d) * (1 - 1 / d))
            assert np.all(np.abs(counts - n / d) <= 3 * sigma)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_matches_closed_form_exhaustively(self, d):
        params = pr.ProtocolParams(d)
        rng = np.random.default_rng(7)
        repeats = 3 if d < 4 else 2
        for perm in permutations(range(d)):
            for bit in (0, 1):
                for _ in range(repeats):
                    rec = pr.commit(params, bit, perm, rng)
                    expected = pr.post_commit_state(params, bit, perm, rec.outcome)
                    assert_allclose(rec.shared_state.amplitudes,
                                    expected.amplitudes, atol=1e-9)

    def test_matches_closed_form_sampled_d5(self):
        params = pr.ProtocolParams(5)
        rng = np.random.default_rng(9)
        for _ in range(8):
            perm = q.random_permutation(5, rng)
            bit = int(rng.integers(2))
            rec = pr.commit(params, bit, perm, rng)
            expected = pr.post_commit_state(params, bit, perm, rec.outcome)
            assert_allclose(rec.shared_state.amplitudes, expected.amplitudes,
                            atol=1e-9)

    def test_record_validates_state(self):
        params = pr.ProtocolParams(2)
        wrong = pr.post_commit_state(params, 1, (0, 1), 1)
        with pytest.raises(ValueError):
            pr.CommitmentRecord(1, (0, 1), 0, wrong)


class TestOpenVerify:
    def test_honest_opening_accepted(self):
        params = pr.ProtocolParams(3)
        rng = np.random.default_rng(15)
        rec = pr.commit(params, 0, (2, 0, 1), rng)
        p = pr.open_verify(rec, 0, (2, 0, 1), rec.shared_state.density())
        assert abs(p - 1.0) <= 1e-9

    def test_wrong_outcome_rejected(self):
        params = pr.ProtocolParams(3)
        perm = (0, 2, 1)
        state_m0 = pr.post_commit_state(params, 1, perm, 0)
        rec = pr.CommitmentRecord(1, perm, 1, pr.post_commit_state(params, 1, perm, 1))
        assert pr.open_verify(rec, 1, perm, state_m0.density()) <= 1e-9

    @pytest.mark.parametrize("d", [2, 3])
    def test_cross_claim_overlap(self, d):
        # Independent oracle: the acceptance probability of claiming the
        # other bit on an untouched state is the squared overlap of the two
        # post-commitment states, which evaluates to 1/d.
        params = pr.ProtocolParams(d)
        perm = tuple(range(d))
        rec = pr.CommitmentRecord(0, perm, 0, pr.post_commit_state(params, 0, perm, 0))
        committed = pr.post_commit_state(params, 0, perm, 0)
        claimed = pr.post_commit_state(params, 1, perm, 0)
        oracle = abs(np.vdot(claimed.amplitudes, committed.amplitudes)) ** 2
        assert abs(oracle - 1.0 / d) < 1e-12
        p = pr.open_verify(rec, 1, perm, committed.density())
        assert abs(p - oracle) <= 1e-9

    def test_shape_mismatch(self):
        params = pr.ProtocolParams(2)
        rec = pr.CommitmentRecord(1, (0, 1), 0, pr.post_commit_state(params, 1, (0, 1), 0))
        with pytest.raises(ValueError):
            pr.open_verify(rec, 1, (0, 1), q.maximally_mixed(q.RegisterShape((2, 2))))

    def test_open_sample_accepts_honest_run(self):
        params = pr.ProtocolParams(2)
        rng = np.random.default_rng(21)
        rec = pr.commit(params, 1, (1, 0), rng)
        assert pr.open_sample(rec, 1, (1, 0), rec.shared_state.density(), rng)


class TestSchmidtFamily:
    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_flat_coefficients(self, d):
        params = pr.ProtocolParams(d)
        perm = tuple(range(d))
        for bit in (0, 1):
            family = pr.post_commit_schmidt(params, bit, perm, d - 1)
            assert_allclose(family.coefficients, np.full(d, 1 / d), atol=1e-12)

    def test_reconstructs_post_commit_state(self):
        params = pr.ProtocolParams(3)
        perm = (1, 2, 0)
        for bit in (0, 1):
            for m in range(3):
                family = pr.post_commit_schmidt(params, bit, perm, m)
                state = pr.post_commit_state(params, bit, perm, m)
                assert_allclose(family.reconstruct().amplitudes,
                                state.amplitudes, atol=1e-9)

    def test_bit1_vectors_product_on_every_cut(self):
        params = pr.ProtocolParams(3)
        family = pr.post_commit_schmidt(params, 1, (2, 0, 1), 1)
        for left in family.left_vectors:
            for cut in pr.alice_cuts(params):
                data = q.schmidt_decompose(left, cut)
                assert data.max_coefficient >= 1 - 1e-9

    def test_bit0_vectors_maximally_entangled_on_every_cut(self):
        params = pr.ProtocolParams(3)
        family = pr.post_commit_schmidt(params, 0, (2, 0, 1), 1)
        for left in family.left_vectors:
            for qudit in range(3):
                red = q.reduced_state(left, keep=(qudit,))
                assert float(np.max(np.abs(red.entries - np.eye(3) / 3))) <= 1e-9

    def test_right_vectors_are_computational(self):
        params = pr.ProtocolParams(2)
        family = pr.post_commit_schmidt(params, 0, (1, 0), 0)
        for j, right in enumerate(family.right_vectors):
            assert_allclose(right.amplitudes,
                            q.basis_vector("Z", j, 2).amplitudes, atol=1e-12)
