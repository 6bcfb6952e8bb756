import numpy as np
import pytest

from fahm.metrics import combining_sinr
from fahm.receivers import (
    UserLinkProblem,
    cuma_receiver,
    dc_receiver,
    dominant_gev,
    effective_ports,
    fahm_geport_receiver,
    geport_select,
    hybrid_decompose,
    interference_plus_noise_inverse,
    interference_plus_noise_matrix,
    per_port_sinr,
    slow_fama_receiver,
    stopping_dimension,
)
from helpers import gev_power_iteration_oracle, random_link_problem


def make_problem(rng, n, users, snr=10.0):
    h, interf, snr = random_link_problem(rng, n, users, snr)
    return UserLinkProblem(h, interf, snr)


def solution_sinr_via_metrics(problem, sol):
    # Rebuild a full channel with the desired column first so the shared
    # SINR evaluator can cross-check the receiver-reported value.
    channel = np.column_stack([problem.desired, problem.interference])
    return combining_sinr(channel, 0, problem.snr, sol.ports, sol.analog, sol.digital)


class TestInterferencePlusNoise:
    def test_no_interferers(self):
        p = UserLinkProblem(np.ones(3, dtype=complex), np.zeros((3, 0)), snr=10.0)
        state = interference_plus_noise_inverse(p)
        assert np.allclose(state.inverse, 10.0 * np.eye(3))

    def test_single_interferer(self):
        h = np.array([0.0, 1.0], dtype=complex)
        interf = np.array([[1.0], [0.0]], dtype=complex)
        p = UserLinkProblem(h, interf, snr=1.0)
        state = interference_plus_noise_inverse(p)
        assert np.allclose(state.inverse, np.diag([0.5, 1.0]))

    def test_multiply_back(self):
        rng = np.random.default_rng(1)
        p = make_problem(rng, 12, 5)
        b = interference_plus_noise_matrix(p)
        state = interference_plus_noise_inverse(p)
        assert np.linalg.norm(b @ state.inverse - np.eye(12)) < 1e-9 * 12


class TestDominantGev:
    def test_identity_matrix(self):
        p = UserLinkProblem(np.array([1.0, 2.0j, -1.0]), np.zeros((3, 0)), snr=1.0)
        state = interference_plus_noise_inverse(p)
        v, lam = dominant_gev(p.desired, state)
        assert np.allclose(v, p.desired)
        assert lam == pytest.approx(6.0)

    def test_scaling(self):
        rng = np.random.default_rng(2)
        p = make_problem(rng, 8, 3)
        state = interference_plus_noise_inverse(p)
        v1, lam1 = dominant_gev(p.desired, state)
        v2, lam2 = dominant_gev(2.0 * p.desired, state)
        assert lam2 == pytest.approx(4.0 * lam1, rel=1e-12)
        assert np.allclose(v2, 2.0 * v1)

    def test_against_power_iteration(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 21))
            users = int(rng.integers(1, 9))
            p = make_problem(rng, n, users)
            state = interference_plus_noise_inverse(p)
            _, lam = dominant_gev(p.desired, state)
            oracle = gev_power_iteration_oracle(p.desired, interference_plus_noise_matrix(p))
            assert lam == pytest.approx(oracle, rel=1e-8)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(4)
        p = make_problem(rng, 10, 4)
        perm = rng.permutation(10)
        p2 = UserLinkProblem(p.desired[perm], p.interference[perm, :], p.snr)
        _, lam1 = dominant_gev(p.desired, interference_plus_noise_inverse(p))
        _, lam2 = dominant_gev(p2.desired, interference_plus_noise_inverse(p2))
        assert lam1 == pytest.approx(lam2, rel=1e-10)


class TestEffectivePorts:
    def test_canonical(self):
        assert effective_ports(np.array([1.0, 0.0, 0.0])) == 1.0

    def test_uniform(self):
        for n in (2, 3, 4, 7, 225):
            assert effective_ports(np.ones(n)) == float(n)

    def test_two_port_split(self):
        v = np.array([np.sqrt(0.5), np.sqrt(0.5), 0.0, 0.0])
        assert effective_ports(v) == 2.0

    def test_scale_and_phase_invariance(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        base = effective_ports(v)
        assert abs(effective_ports(3.7 * v) - base) < 1e-12 * base
        assert abs(effective_ports(np.exp(1j * 0.9) * v) - base) < 1e-12 * base

    def test_range(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            v = rng.standard_normal(12) + 1j * rng.standard_normal(12)
            assert 1.0 <= effective_ports(v) <= 12.0

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            effective_ports(np.zeros(4))


class TestStoppingDimension:
    def test_values(self):
        assert stopping_dimension(1.0, 10) == 1
        assert stopping_dimension(84.2, 225) == 85
        assert stopping_dimension(4.0, 10) == 4

    def test_clamped(self):
        assert stopping_dimension(0.2, 10) == 1
        assert stopping_dimension(12.7, 10) == 10


class TestGeportSelect:
    def test_no_elimination(self):
        rng = np.random.default_rng(7)
        p = make_problem(rng, 6, 3)
        state = interference_plus_noise_inverse(p)
        _, lam_full = dominant_gev(p.desired, state)
        res = geport_select(p, 6)
        assert list(res.ports) == list(range(6))
        assert res.sinr == pytest.approx(lam_full, rel=1e-12)
        assert res.trace.removed_ports == []

    def test_single_user_keeps_strongest_port(self):
        rng = np.random.default_rng(8)
        h = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        p = UserLinkProblem(h, np.zeros((9, 0)), snr=5.0)
        res = geport_select(p, 1)
        assert res.ports[0] == int(np.argmax(np.abs(h)))
        assert res.sinr == pytest.approx(5.0 * np.max(np.abs(h)) ** 2, rel=1e-10)

    def test_trace_non_increasing(self):
        rng = np.random.default_rng(9)
        p = make_problem(rng, 16, 5)
        res = geport_select(p, 2)
        seq = res.trace.sinr_sequence
        assert len(res.trace.removed_ports) == 14
        assert len(seq) == 15
        assert np.all(np.diff(seq) <= 0.0)

    def test_fast_equals_naive(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            n = int(rng.integers(4, 25))
            users = int(rng.integers(2, 7))
            target = int(rng.integers(2, min(9, n + 1)))
            p = make_problem(rng, n, users)
            fast = geport_select(p, target, mode="fast")
            naive = geport_select(p, target, mode="naive")
            assert list(fast.ports) == list(naive.ports)
            assert fast.sinr == pytest.approx(naive.sinr, rel=1e-8)
            assert fast.trace.removed_ports == naive.trace.removed_ports

    def test_single_user_trace_matches_subset_enumeration(self):
        # no interference: the best size-s subset is enumerable, and the
        # trace should stay flat while near-dead ports leave first
        from itertools import combinations

        rng = np.random.default_rng(42)
        mags = np.array([1.2, 0.9, 1e-7, 2e-7, 0.7, 5e-8, 1.4, 1e-8])
        h = mags * np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
        snr = 4.0
        p = UserLinkProblem(h, np.zeros((8, 0)), snr=snr)
        res = geport_select(p, 1)
        seq = res.trace.sinr_sequence
        power = np.abs(h) ** 2
        for removed_count in range(8):
            size = 8 - removed_count
            best = max(
                snr * sum(power[list(sub)]) for sub in combinations(range(8), size)
            )
            assert seq[removed_count] == pytest.approx(best, rel=1e-9)
        # the four near-dead ports leave first, keeping the trace flat
        assert set(res.trace.removed_ports[:4]) == {2, 3, 5, 7}
        assert seq[4] > 0.999 * seq[0]

    def test_rejects_bad_target(self):
        rng = np.random.default_rng(11)
        p = make_problem(rng, 4, 2)
        with pytest.raises(ValueError):
            geport_select(p, 0)
        with pytest.raises(ValueError):
            geport_select(p, 5)

    def test_subset_monotone_vs_full(self):
        rng = np.random.default_rng(12)
        p = make_problem(rng, 12, 4)
        state = interference_plus_noise_inverse(p)
        _, lam_full = dominant_gev(p.desired, state)
        for target in (1, 3, 6, 9):
            res = geport_select(p, target)
            assert res.sinr <= lam_full * (1 + 1e-12)


class TestHybridDecompose:
    def test_all_twos(self):
        analog, digital = hybrid_decompose(np.array([2.0, 2.0]))
        assert np.allclose(analog, np.ones((2, 2)))
        assert np.allclose(digital, np.ones(2) / np.sqrt(2))
        assert np.allclose(analog @ digital, np.array([np.sqrt(2), np.sqrt(2)]))

    def test_mixed_phases(self):
        analog, digital = hybrid_decompose(np.array([2.0j, 2.0]))
        assert np.allclose(analog, np.array([[1j, 1j], [1.0, 1.0]]))
        recon = analog @ digital
        assert np.allclose(recon, np.array([2.0j, 2.0]) / np.sqrt(2))

    def test_random_reconstruction(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            t = rng.standard_normal(16) + 1j * rng.standard_normal(16)
            analog, digital = hybrid_decompose(t)
            assert np.max(np.abs(np.abs(analog) - 1.0)) < 1e-12
            c = np.sqrt(2.0) / np.max(np.abs(t))
            assert np.max(np.abs(analog @ digital - c * t)) < 1e-10
            assert abs(np.linalg.norm(digital) - 1.0) < 1e-12

    def test_zero_entry_inside(self):
        t = np.array([1.0, 0.0, 0.5j])
        analog, digital = hybrid_decompose(t)
        recon = analog @ digital
        c = np.sqrt(2.0) / 1.0
        assert np.max(np.abs(recon - c * t)) < 1e-12

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            hybrid_decompose(np.zeros(3))


class TestFahmGeportReceiver:
    def test_fixed_single_port_single_user(self):
        h = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)
        p = UserLinkProblem(h, np.zeros((4, 0)), snr=7.0)
        sol = fahm_geport_receiver(p, target_ports=1)
        assert list(sol.ports) == [1]
        assert sol.sinr == pytest.approx(7.0, rel=1e-12)

    def test_full_selection_equals_digital_gev(self):
        rng = np.random.default_rng(14)
        p = make_problem(rng, 10, 4)
        state = interference_plus_noise_inverse(p)
        _, lam = dominant_gev(p.desired, state)
        sol = fahm_geport_receiver(p, target_ports=10)
        assert sol.sinr == pytest.approx(lam, rel=1e-10)

    def test_reported_sinr_matches_metrics(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            p = make_problem(rng, 12, 5)
            sol = fahm_geport_receiver(p, target_ports=4)
            assert sol.sinr == pytest.approx(solution_sinr_via_metrics(p, sol), rel=1e-9)

    def test_effective_policy_records_peff(self):
        rng = np.random.default_rng(16)
        p = make_problem(rng, 12, 4)
        sol = fahm_geport_receiver(p)
        assert sol.effective_ports is not None
        assert 1.0 <= sol.effective_ports <= 12.0
        assert len(sol.ports) == stopping_dimension(sol.effective_ports, 12)

    def test_degenerate_channel(self):
        p = UserLinkProblem(np.zeros(5, dtype=complex), np.zeros((5, 0)), snr=1.0)
        sol = fahm_geport_receiver(p, target_ports=2)
        assert sol.sinr == 0.0
        assert list(sol.ports) == [0]


class TestPerPortSinr:
    def test_single_user(self):
        rng = np.random.default_rng(17)
        h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        p = UserLinkProblem(h, np.zeros((6, 0)), snr=4.0)
        assert np.allclose(per_port_sinr(p), 4.0 * np.abs(h) ** 2)

    def test_balanced_port(self):
        p = UserLinkProblem(
            np.array([1.0 + 0j]), np.array([[1.0 + 0j]]), snr=1.0
        )
        assert per_port_sinr(p)[0] == pytest.approx(0.5)

    def test_matches_singleton_metrics(self):
        rng = np.random.default_rng(18)
        p = make_problem(rng, 8, 4)
        channel = np.column_stack([p.desired, p.interference])
        pps = per_port_sinr(p)
        for port in range(8):
            direct = combining_sinr(channel, 0, p.snr, [port], [[1.0]], [1.0])
            assert pps[port] == pytest.approx(direct, rel=1e-12)


class TestSlowFama:
    def test_single_user_max_gain(self):
        rng = np.random.default_rng(19)
        h = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        p = UserLinkProblem(h, np.zeros((7, 0)), snr=2.0)
        sol = slow_fama_receiver(p)
        assert sol.ports[0] == int(np.argmax(np.abs(h)))

    def test_tie_breaks_to_first(self):
        p = UserLinkProblem(np.ones(4, dtype=complex), np.zeros((4, 0)), snr=1.0)
        sol = slow_fama_receiver(p)
        assert sol.ports[0] == 0

    def test_sinr_is_max_per_port(self):
        rng = np.random.default_rng(20)
        p = make_problem(rng, 9, 3)
        sol = slow_fama_receiver(p)
        assert sol.sinr == pytest.approx(float(np.max(per_port_sinr(p))), rel=1e-12)
        assert sol.sinr == pytest.approx(solution_sinr_via_metrics(p, sol), rel=1e-9)


class TestDcReceiver:
    def test_p1_equals_slow_fama(self):
        rng = np.random.default_rng(21)
        p = make_problem(rng, 10, 4)
        dc = dc_receiver(p, 1)
        sf = slow_fama_receiver(p)
        assert list(dc.ports) == list(sf.ports)
        assert dc.sinr == pytest.approx(sf.sinr, rel=1e-10)

    def test_full_equals_gev(self):
        rng = np.random.default_rng(22)
        p = make_problem(rng, 8, 3)
        state = interference_plus_noise_inverse(p)
        _, lam = dominant_gev(p.desired, state)
        sol = dc_receiver(p, 8)
        assert sol.sinr == pytest.approx(lam, rel=1e-10)

    def test_bounded_by_full_gev(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(2, 13))
            users = int(rng.integers(1, 6))
            p = make_problem(rng, n, users)
            state = interference_plus_noise_inverse(p)
            _, lam = dominant_gev(p.desired, state)
            n_sel = int(rng.integers(1, n + 1))
            sol = dc_receiver(p, n_sel)
            sf = slow_fama_receiver(p)
            assert sf.sinr <= sol.sinr * (1 + 1e-10)
            assert sol.sinr <= lam * (1 + 1e-10)

    def test_reported_sinr_matches_metrics(self):
        rng = np.random.default_rng(24)
        p = make_problem(rng, 12, 5)
        sol = dc_receiver(p, 4)
        assert sol.sinr == pytest.approx(solution_sinr_via_metrics(p, sol), rel=1e-9)

    def test_rejects_bad_p(self):
        rng = np.random.default_rng(25)
        p = make_problem(rng, 4, 2)
        with pytest.raises(ValueError):
            dc_receiver(p, 0)
        with pytest.raises(ValueError):
            dc_receiver(p, 5)


class TestCumaReceiver:
    def test_noiseless_identity(self):
        rng = np.random.default_rng(26)
        for _ in range(200):
            n = int(rng.integers(2, 33))
            h = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            p = UserLinkProblem(h, np.zeros((n, 0)), snr=1.0)
            sol = cuma_receiver(p, rho=0.4)
            t_eq = sol.analog @ sol.digital
            detected = t_eq.conj() @ h[sol.ports]
            assert abs(detected - 1.0) < 1e-10

    def test_rho_zero_covers_all_sign_matched_ports(self):
        # at rho = 0 every port matching its dominant component's lead sign
        # joins; opposite-sign ports are excluded so the aggregation stays
        # coherent
        rng = np.random.default_rng(27)
        h = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        p = UserLinkProblem(h, np.zeros((20, 0)), snr=1.0)
        sol = cuma_receiver(p, rho=0.0, n_max=20)
        i_dom = np.abs(h.real) >= np.abs(h.imag)
        s_i = np.sign(h.real[np.argmax(np.abs(h.real))])
        s_q = np.sign(h.imag[np.argmax(np.abs(h.imag))])
        expected = np.sort(
            np.nonzero((i_dom & (np.sign(h.real) == s_i)) | (~i_dom & (np.sign(h.imag) == s_q)))[0]
        )
        assert list(sol.ports) == list(expected)

    def test_partial_sums_coherent(self):
        # the selected in-phase components share a sign, so the analog sums
        # accumulate instead of cancelling
        rng = np.random.default_rng(127)
        for _ in range(50):
            h = rng.standard_normal(40) + 1j * rng.standard_normal(40)
            p = UserLinkProblem(h, np.zeros((40, 0)), snr=1.0)
            sol = cuma_receiver(p, rho=0.4)
            i_rows = np.abs(sol.analog[:, 0]) > 0
            re_sel = h.real[sol.ports[i_rows]]
            if re_sel.size:
                assert abs(np.sum(re_sel)) == pytest.approx(np.sum(np.abs(re_sel)))

    def test_analog_sparsity(self):
        rng = np.random.default_rng(28)
        h = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        p = UserLinkProblem(h, np.zeros((16, 0)), snr=1.0)
        sol = cuma_receiver(p, rho=0.0)
        in_phase = np.abs(h.real) >= np.abs(h.imag)
        for row, port in enumerate(sol.ports):
            if in_phase[port]:
                assert sol.analog[row, 2] == 0 and sol.analog[row, 3] == 0
            else:
                assert sol.analog[row, 0] == 0 and sol.analog[row, 1] == 0

    def test_n_max_truncation(self):
        rng = np.random.default_rng(29)
        h = rng.standard_normal(30) + 1j * rng.standard_normal(30)
        p = UserLinkProblem(h, np.zeros((30, 0)), snr=1.0)
        sol = cuma_receiver(p, rho=0.0, n_max=3)
        assert len(sol.ports) <= 6

    def test_flagged_relaxed_modulus(self):
        rng = np.random.default_rng(30)
        p = make_problem(rng, 10, 3)
        sol = cuma_receiver(p)
        assert not sol.unit_modulus_analog
        assert np.max(np.abs(sol.analog)) <= 1.0 + 1e-12

    def test_reported_sinr_matches_metrics(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            p = make_problem(rng, 12, 4)
            sol = cuma_receiver(p)
            assert sol.sinr == pytest.approx(solution_sinr_via_metrics(p, sol), rel=1e-9)

    def test_rejects_bad_params(self):
        rng = np.random.default_rng(32)
        p = make_problem(rng, 4, 2)
        with pytest.raises(ValueError):
            cuma_receiver(p, rho=1.5)
        with pytest.raises(ValueError):
            cuma_receiver(p, n_max=1)


class TestSchemeOrdering:
    def test_nested_feasible_sets(self):
        # slow-FAMA <= DC(P) <= full-set GEV for every instance and P
        rng = np.random.default_rng(33)
        for _ in range(100):
            n = int(rng.integers(3, 15))
            users = int(rng.integers(2, 6))
            p = make_problem(rng, n, users)
            state = interference_plus_noise_inverse(p)
            _, lam = dominant_gev(p.desired, state)
            sf = slow_fama_receiver(p).sinr
            for n_sel in (1, max(1, n // 2), n):
                dc = dc_receiver(p, n_sel).sinr
                assert sf <= dc * (1 + 1e-10)
                assert dc <= lam * (1 + 1e-10)

    def test_hybrid_preserves_sinr(self):
        # the two-chain factorization must not move the Eq-12 value
        rng = np.random.default_rng(34)
        for _ in range(30):
            p = make_problem(rng, 10, 4)
            sol = fahm_geport_receiver(p, target_ports=5)
            channel = np.column_stack([p.desired, p.interference])
            with_pair = combining_sinr(channel, 0, p.snr, sol.ports, sol.analog, sol.digital)
            with_t = combining_sinr(
                channel, 0, p.snr, sol.ports, sol.combiner.reshape(-1, 1), [1.0]
            )
            assert with_pair == pytest.approx(with_t, rel=1e-9)
