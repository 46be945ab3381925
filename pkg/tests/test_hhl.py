import numpy as np
import pytest

from hhlsim import circuit as qc
from hhlsim import hhl
from hhlsim.errors import (
    EigenvalueNotEncodable,
    NotPositiveDefinite,
    SwapPathUnavailable,
    ZeroReferenceComponent,
)
from hhlsim.qcore import PureState, basis_state

A_DEMO = np.array([[1.5, 0.5], [0.5, 1.5]])


def demo_system(b):
    return hhl.linear_system(A_DEMO, b, normalize=True)


def encodable_system(rng, dim):
    """Random Hermitian system with eigenvalues drawn from {1, 2, 3}."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    lam = rng.choice([1.0, 2.0, 3.0], size=dim)
    lam[0] = rng.choice([1.0, 2.0])  # keep at least one small eigenvalue
    a = (q * lam) @ q.conj().T
    a = (a + a.conj().T) / 2.0
    b = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return hhl.linear_system(a, b, normalize=True)


class TestLinearSystem:
    def test_rejects_non_positive_spectrum(self):
        with pytest.raises(NotPositiveDefinite):
            hhl.linear_system(np.diag([1.0, -2.0]), [1.0, 0.0])

    def test_condition_number(self):
        s = demo_system([1.0, 0.0])
        assert s.kappa == pytest.approx(2.0, abs=1e-12)

    def test_requires_unit_b(self):
        with pytest.raises(ValueError):
            hhl.linear_system(A_DEMO, [1.0, 1.0])


class TestPrepareB:
    def test_theta_zero(self):
        assert np.allclose(hhl.prepare_b(0.0).amplitudes, [1.0, 0.0])

    def test_theta_half_pi(self):
        amp = hhl.prepare_b(np.pi / 2.0).amplitudes
        assert np.allclose(amp, [1.0, 1.0] / np.sqrt(2.0), atol=1e-12)

    def test_theta_pi(self):
        amp = hhl.prepare_b(np.pi).amplitudes
        assert abs(amp[1] - 1.0) < 1e-12


class TestConditionalEvolution:
    def test_tau_zero_is_identity(self):
        s = demo_system([1.0, 0.0])
        gate = hhl.conditional_evolution(s, hhl.SolverConfig())[0]
        assert np.max(np.abs(gate.matrix - np.eye(2))) < 1e-12

    def test_tau_one_evolves_quarter_period(self):
        s = demo_system([1.0, 0.0])
        u2 = s.spectrum.eigenvectors[:, 1]
        gate = hhl.conditional_evolution(s, hhl.SolverConfig())[1]
        assert gate.controls == ((0, 0), (1, 1))  # clock value 1 = |01>
        assert np.max(np.abs(gate.matrix @ u2 + u2)) < 1e-10

    def test_product_matches_summed_operator(self):
        s = demo_system([0.6, 0.8])
        cfg = hhl.SolverConfig()
        gates = hhl.conditional_evolution(s, cfg)
        c = qc.Circuit(3, tuple(gates))
        cols = [qc.run_circuit(basis_state(3, i), c).amplitudes for i in range(8)]
        got = np.array(cols).T
        # independent assembly of sum_tau |tau><tau| (x) U^tau
        u1 = hhl.qcore.matrix_exp_hermitian(s.a, cfg.t0 / 4.0)
        expected = np.zeros((8, 8), dtype=complex)
        for tau in range(4):
            proj = np.zeros((4, 4))
            proj[tau, tau] = 1.0
            expected += np.kron(proj, np.linalg.matrix_power(u1, tau))
        assert np.max(np.abs(got - expected)) < 1e-10


class TestPhaseEstimate:
    def test_eigenvector_inputs_write_their_labels(self):
        s = demo_system([1.0, 0.0])
        cfg = hhl.SolverConfig()
        for j, label in ((0, 1), (1, 2)):
            u = s.spectrum.eigenvectors[:, j]
            out = hhl.phase_estimate(s, cfg, PureState(u))
            clock_probs = out.probabilities().reshape(4, 2).sum(axis=1)
            assert clock_probs[label] == pytest.approx(1.0, abs=1e-9)

    def test_generic_input_splits_evenly(self):
        s = demo_system([1.0, 0.0])
        out = hhl.phase_estimate(s, hhl.SolverConfig(), PureState(np.array([1.0, 0.0], dtype=complex)))
        beta = s.expansion_coefficients()
        assert np.allclose(np.abs(beta), [1.0, 1.0] / np.sqrt(2.0), atol=1e-12)
        clock_probs = out.probabilities().reshape(4, 2).sum(axis=1)
        assert clock_probs[1] == pytest.approx(0.5, abs=1e-9)
        assert clock_probs[2] == pytest.approx(0.5, abs=1e-9)
        assert hhl.clock_leakage(out, s, hhl.SolverConfig()) < 1e-10


class TestInversionGates:
    def apply_branch(self, gates, clock_label):
        state = basis_state(2, clock_label).tensor(basis_state(1, 0)).tensor(basis_state(1, 0))
        for g in gates:
            state = qc.apply_gate(state, g)
        return state

    def test_linear_mode_amplitudes(self):
        gates = hhl.eigenvalue_inversion_gates(hhl.SolverConfig(rotation_mode="linear", r=2))
        # clock |01> = eigenvalue 1: theta = pi/2, amplitude sin(pi/4)
        out = self.apply_branch(gates, 0b01)
        anc1 = np.linalg.norm(out.amplitudes.reshape(8, 2)[:, 1])
        assert anc1 == pytest.approx(np.sin(np.pi / 4.0), abs=1e-12)
        # clock |10> = eigenvalue 2: theta = pi/4, amplitude sin(pi/8)
        out = self.apply_branch(gates, 0b10)
        anc1 = np.linalg.norm(out.amplitudes.reshape(8, 2)[:, 1])
        assert anc1 == pytest.approx(np.sin(np.pi / 8.0), abs=1e-12)

    def test_exact_mode_amplitudes(self):
        cfg = hhl.SolverConfig(rotation_mode="exact", c_tilde=1.0)
        gates = hhl.eigenvalue_inversion_gates(cfg)
        out = self.apply_branch(gates, 0b01)
        assert np.linalg.norm(out.amplitudes.reshape(8, 2)[:, 1]) == pytest.approx(1.0, abs=1e-12)
        out = self.apply_branch(gates, 0b10)
        assert np.linalg.norm(out.amplitudes.reshape(8, 2)[:, 1]) == pytest.approx(0.5, abs=1e-12)

    def test_swap_relabels_clock(self):
        s = demo_system([1.0, 0.0])
        cfg = hhl.SolverConfig()
        u1 = s.spectrum.eigenvectors[:, 0]
        estimated = hhl.phase_estimate(s, cfg, PureState(u1))  # clock |01>
        with_anc = estimated.tensor(basis_state(1, 0))
        gates = hhl.eigenvalue_inversion_gates(cfg)
        state = with_anc
        for g in gates:
            state = qc.apply_gate(state, g)
        clock_probs = state.probabilities().reshape(4, 4).sum(axis=1)
        # label |10> = 2 = 2/lambda_1, per the swap relabeling
        assert clock_probs[2] == pytest.approx(1.0, abs=1e-9)

    def test_rejects_wide_clock(self):
        with pytest.raises(SwapPathUnavailable):
            hhl.eigenvalue_inversion_gates(hhl.SolverConfig(clock_qubits=3))

    def test_rejects_unswappable_labels(self):
        with pytest.raises(SwapPathUnavailable):
            hhl.eigenvalue_inversion_gates(hhl.SolverConfig(), encoded_values=(1, 2, 3))


class TestRunHhl:
    def test_eigenvector_input_returns_itself(self):
        s = demo_system(np.array([1.0, 1.0]) / np.sqrt(2.0))
        report = hhl.run_hhl(s, hhl.SolverConfig(rotation_mode="exact"))
        assert np.max(np.abs(report.x_quantum - np.array([1.0, 1.0]) / np.sqrt(2.0))) < 1e-9

    def test_b10_exact_solution(self):
        report = hhl.run_hhl(demo_system([1.0, 0.0]), hhl.SolverConfig(rotation_mode="exact"))
        expected = np.array([3.0, -1.0]) / np.sqrt(10.0)
        assert np.max(np.abs(report.x_quantum - expected)) < 1e-9
        assert abs(np.vdot(report.x_quantum, report.x_classical)) > 1.0 - 1e-9

    def test_linear_mode_symmetric_input(self):
        s = demo_system(np.array([1.0, 1.0]) / np.sqrt(2.0))
        report = hhl.run_hhl(s, hhl.SolverConfig(rotation_mode="linear", r=2))
        assert report.solution_ratio_sq == pytest.approx(1.0, abs=1e-12)
        assert report.success_probability == pytest.approx(np.sin(np.pi / 8.0) ** 2, abs=1e-9)

    def test_uncompute_residual(self):
        for b in ([1.0, 0.0], np.array([1.0, 1.0]) / np.sqrt(2.0)):
            for mode in ("linear", "exact"):
                report = hhl.run_hhl(demo_system(b), hhl.SolverConfig(rotation_mode=mode))
                assert report.clock_residual < 1e-10

    def test_postselection_matches_branch_formula(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            s = encodable_system(rng, 2)
            cfg = hhl.SolverConfig(rotation_mode="linear", r=3)
            report = hhl.run_hhl(s, cfg)
            beta = s.expansion_coefficients()
            theta = (2.0 * np.pi / 2**cfg.r) / s.spectrum.eigenvalues
            expected = float(np.sum(np.abs(beta * np.sin(theta / 2.0)) ** 2))
            assert report.success_probability == pytest.approx(expected, abs=1e-10)

    def test_global_phase_of_b_is_irrelevant(self):
        rng = np.random.default_rng(5)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        b /= np.linalg.norm(b)
        r1 = hhl.run_hhl(hhl.linear_system(A_DEMO, b), hhl.SolverConfig(rotation_mode="exact"))
        r2 = hhl.run_hhl(
            hhl.linear_system(A_DEMO, np.exp(0.7j) * b), hhl.SolverConfig(rotation_mode="exact")
        )
        assert np.max(np.abs(np.abs(r1.x_quantum) - np.abs(r2.x_quantum))) < 1e-10

    def test_oracle_equivalence_small_batch(self):
        rng = np.random.default_rng(77)
        for _ in range(10):
            s = encodable_system(rng, int(rng.choice([2, 4])))
            report = hhl.run_hhl(s, hhl.SolverConfig(rotation_mode="exact"))
            assert abs(np.vdot(report.x_quantum, report.x_classical)) > 1.0 - 1e-9
            assert report.clock_residual < 1e-10

    def test_unencodable_spectrum_rejected(self):
        s = hhl.linear_system(np.diag([5.0, 2.0]), [0.6, 0.8])
        with pytest.raises(EigenvalueNotEncodable):
            hhl.run_hhl(s, hhl.SolverConfig())

    def test_c_tilde_above_lambda_min_rejected(self):
        s = demo_system([1.0, 0.0])
        with pytest.raises(ValueError):
            hhl.run_hhl(s, hhl.SolverConfig(rotation_mode="exact", c_tilde=1.5))

    def test_noisy_run_reports_band_metrics(self):
        s = demo_system(np.array([1.0, 1.0]) / np.sqrt(2.0))
        cfg = hhl.SolverConfig(rotation_mode="linear")

        def builder(c):
            events = list(qc.dephasing_schedule(c, 50.0, 500.0))
            events += list(qc.pulse_error_schedule(c, 0.0004))
            return events

        report = hhl.run_hhl(s, cfg, noise_builder=builder)
        assert 0.90 <= report.fidelity_4q < 1.0
        assert report.final_density is not None
        assert abs(np.trace(report.final_density.matrix) - 1.0) < 1e-10


class TestTheoreticalFinalState:
    def test_eigenvector_input_amplitudes(self):
        s = demo_system(np.array([1.0, 1.0]) / np.sqrt(2.0))
        state = hhl.theoretical_final_state(s, hhl.SolverConfig(rotation_mode="exact", c_tilde=1.0))
        amp = state.amplitudes
        expect = np.zeros(16)
        expect[0b0000] = np.sqrt(3.0 / 8.0)
        expect[0b0010] = np.sqrt(3.0 / 8.0)
        expect[0b0001] = np.sqrt(1.0 / 8.0)
        expect[0b0011] = np.sqrt(1.0 / 8.0)
        assert np.max(np.abs(np.abs(amp) - expect)) < 1e-12

    def test_matches_circuit_output(self):
        for theta in (1.7419501646378182, 1.3044332446524245, np.pi / 2.0):
            s = demo_system(hhl.prepare_b(theta).amplitudes)
            for mode in ("linear", "exact"):
                cfg = hhl.SolverConfig(rotation_mode=mode)
                report = hhl.run_hhl(s, cfg)
                ideal = hhl.theoretical_final_state(s, cfg)
                overlap = abs(np.vdot(ideal.amplitudes, report.final_state.amplitudes))
                assert overlap > 1.0 - 1e-10

    def test_requires_exact_encoding(self):
        s = demo_system([1.0, 0.0])
        with pytest.raises(EigenvalueNotEncodable):
            hhl.theoretical_final_state(s, hhl.SolverConfig(t0=5.0))

    def test_effective_rotation_constant(self):
        value = hhl.effective_rotation_constant([1.0, 2.0], 2)
        assert value == pytest.approx(0.736, abs=1e-3)
        assert value == pytest.approx(0.7362368229583636, abs=1e-12)


class TestMaxRelativeError:
    def test_identical_vectors(self):
        assert hhl.max_relative_error([0.6, 0.8], [0.6, 0.8]) == 0.0

    def test_error_formula_construction(self):
        assert hhl.max_relative_error([1.07, 1.0], [1.0, 1.0]) == pytest.approx(0.07, abs=1e-12)

    def test_zero_reference_component(self):
        with pytest.raises(ZeroReferenceComponent):
            hhl.max_relative_error([1.0, 0.0], [1.0, 0.0])

    def test_linear_vs_exact_for_b10(self):
        # The r=2 linear approximation distorts the b=(1,0) solution by
        # about 9.8% in the worst component (the 4% figure holds only for
        # the three demonstration inputs, tested in the acceptance suite).
        lin = hhl.run_hhl(demo_system([1.0, 0.0]), hhl.SolverConfig(rotation_mode="linear", r=2))
        err = hhl.max_relative_error(lin.x_quantum, lin.x_classical)
        assert 0.09 < err < 0.10


class TestSweeps:
    @pytest.mark.parametrize("b", [[1.0, 0.0], hhl.prepare_b(1.3044332446524245).amplitudes])
    def test_r_sweep_monotone(self, b):
        rows = hhl.sweep_r(demo_system(b), range(1, 9), "linear")
        errors = [row.max_rel_error for row in rows]
        probs = [row.success_probability for row in rows]
        assert all(e1 >= e2 - 1e-12 for e1, e2 in zip(errors, errors[1:]))
        assert all(p1 >= p2 - 1e-12 for p1, p2 in zip(probs, probs[1:]))
        assert errors[-1] < 1e-3

    def test_r2_error_within_budget_for_demo_inputs(self):
        for theta in (1.7419501646378182, 1.3044332446524245, np.pi / 2.0):
            rows = hhl.sweep_r(demo_system(hhl.prepare_b(theta).amplitudes), [2], "linear")
            assert rows[0].max_rel_error <= 0.04

    def test_t0_sweep_allows_approximate_encodings(self):
        s = demo_system([0.6, 0.8])
        rows = hhl.sweep_t0(s, [2.0 * np.pi, 2.5 * np.pi, 3.0 * np.pi], "exact")
        assert rows[0].max_rel_error < 1e-9  # exact encoding at t0 = 2*pi
        assert rows[1].max_rel_error > 1e-6  # leakage once encoding is inexact

    def test_exact_mode_insensitive_to_r(self):
        rows = hhl.sweep_r(demo_system([1.0, 0.0]), [1, 4], "exact")
        assert abs(rows[0].max_rel_error - rows[1].max_rel_error) < 1e-12


class TestThetaForTargetRatio:
    @pytest.mark.parametrize("target", [0.5, 3.0, 1.0])
    def test_round_trip(self, target):
        s = demo_system([1.0, 0.0])
        theta = hhl.theta_for_target_ratio(s, target)
        b = hhl.prepare_b(theta).amplitudes
        x = np.linalg.solve(A_DEMO, b)
        assert abs(x[0] / x[1]) ** 2 == pytest.approx(target, abs=1e-10)
