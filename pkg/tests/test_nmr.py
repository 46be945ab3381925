import numpy as np
import pytest

from hhlsim import hhl, nmr
from hhlsim.errors import DimensionMismatch, FitDiverged, OutOfCalibrationRange
from hhlsim.qcore import DensityMatrix, basis_state

A_DEMO = np.array([[1.5, 0.5], [0.5, 1.5]])


class TestPpsState:
    def test_full_polarization_is_pure(self):
        rho = nmr.pps_state(1.0)
        assert np.max(np.abs(rho.matrix - basis_state(4, 0).density().matrix)) < 1e-12

    def test_zero_polarization_is_maximally_mixed(self):
        rho = nmr.pps_state(0.0)
        assert np.max(np.abs(rho.matrix - np.eye(16) / 16.0)) < 1e-12

    def test_experimental_polarization(self):
        eps = 1e-5
        rho = nmr.pps_state(eps)
        diag = rho.populations()
        assert diag[0] == pytest.approx((1.0 - eps) / 16.0 + eps, abs=1e-15)
        assert np.allclose(diag[1:], (1.0 - eps) / 16.0, atol=1e-15)

    def test_valid_density_for_all_polarizations(self):
        for eps in (1e-6, 0.01, 0.3, 0.77, 1.0):
            rho = nmr.pps_state(eps)  # constructor validates trace/PSD
            assert abs(np.trace(rho.matrix) - 1.0) < 1e-12

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            nmr.pps_state(1.5)


class TestChemicalShift:
    def test_anchor_values(self):
        assert nmr.chemical_shift("F1", 303.0) == pytest.approx(-33122.4, abs=1e-12)
        assert nmr.chemical_shift("F2", 303.0) == pytest.approx(-42677.7, abs=1e-12)
        assert nmr.chemical_shift("F3", 303.0) == pytest.approx(-56445.8, abs=1e-12)

    def test_off_anchor_values(self):
        assert nmr.chemical_shift("F1", 304.0) == pytest.approx(-33125.4, abs=1e-9)
        assert nmr.chemical_shift("F2", 305.0) == pytest.approx(-42677.7 - 2.6, abs=1e-9)
        assert nmr.chemical_shift("F3", 302.0) == pytest.approx(-56447.4, abs=1e-9)

    def test_out_of_calibration_window(self):
        with pytest.raises(OutOfCalibrationRange):
            nmr.chemical_shift("F1", 292.0)
        with pytest.raises(OutOfCalibrationRange):
            nmr.chemical_shift("F3", 313.5)

    def test_only_fluorines_have_formulas(self):
        with pytest.raises(ValueError):
            nmr.chemical_shift("C", 303.0)


class TestSynthesizeSpectrum:
    def test_ground_state_single_peak(self):
        spectrum = nmr.synthesize_spectrum(basis_state(4, 0).density())
        by_label = spectrum.intensity_by_label()
        assert by_label["p0-p8"] == pytest.approx(1.0, abs=1e-15)
        others = [v for k, v in by_label.items() if k != "p0-p8"]
        assert np.max(np.abs(others)) < 1e-15

    def test_maximally_mixed_is_flat(self):
        spectrum = nmr.synthesize_spectrum(DensityMatrix(np.eye(16) / 16.0))
        assert all(abs(p.intensity) < 1e-15 for p in spectrum.peaks)

    def test_experiment3_solution_ratio(self):
        s = hhl.linear_system(A_DEMO, np.array([1.0, 1.0]) / np.sqrt(2.0))
        state = hhl.theoretical_final_state(s, hhl.SolverConfig(rotation_mode="linear", r=2))
        by_label = nmr.synthesize_spectrum(state.density()).intensity_by_label()
        assert by_label["p1-p9"] / by_label["p3-p11"] == pytest.approx(1.0, abs=1e-12)

    def test_printed_peak_order(self):
        # ascending frequency must reproduce the documented left-to-right order
        spectrum = nmr.synthesize_spectrum(nmr.pps_state(0.5))
        labels = [p.label for p in spectrum.peaks]
        assert labels == [
            "p1-p9", "p0-p8", "p3-p11", "p2-p10",
            "p5-p13", "p4-p12", "p7-p15", "p6-p14",
        ]

    def test_population_difference_mapping_is_exact(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            pops = rng.random(16)
            pops /= pops.sum()
            rho = DensityMatrix(np.diag(pops).astype(complex))
            by_label = nmr.synthesize_spectrum(rho).intensity_by_label()
            for j in range(8):
                assert abs(by_label[f"p{j}-p{j + 8}"] - (pops[j] - pops[j + 8])) < 1e-12

    def test_linearity_in_the_state(self):
        rng = np.random.default_rng(9)
        p1, p2 = rng.random(16), rng.random(16)
        r1 = DensityMatrix(np.diag(p1 / p1.sum()).astype(complex))
        r2 = DensityMatrix(np.diag(p2 / p2.sum()).astype(complex))
        mix = DensityMatrix(0.3 * r1.matrix + 0.7 * r2.matrix)
        got = nmr.synthesize_spectrum(mix).intensity_by_label()
        a = nmr.synthesize_spectrum(r1).intensity_by_label()
        b = nmr.synthesize_spectrum(r2).intensity_by_label()
        for label, value in got.items():
            assert value == pytest.approx(0.3 * a[label] + 0.7 * b[label], abs=1e-12)

    def test_rejects_wrong_width(self):
        with pytest.raises(DimensionMismatch):
            nmr.synthesize_spectrum(basis_state(3, 0).density())


class TestLorentzianFit:
    def sample(self, peaks, freqs):
        total = np.zeros_like(freqs)
        for c, h, w in peaks:
            total += nmr.lorentzian(freqs, c, h, w)
        return np.column_stack([freqs, total])

    def test_single_peak_noiseless(self):
        freqs = np.linspace(-10.0, 10.0, 400)
        fitted = nmr.lorentzian_fit(self.sample([(1.3, 2.0, 0.8)], freqs), 1)
        assert fitted[0].center == pytest.approx(1.3, rel=1e-6)
        assert fitted[0].intensity == pytest.approx(2.0, rel=1e-6)
        assert fitted[0].width == pytest.approx(0.8, rel=1e-6)

    def test_two_overlapping_peaks(self):
        freqs = np.linspace(-10.0, 13.0, 600)
        data = self.sample([(0.0, 1.0, 1.0), (3.0, 0.7, 1.0)], freqs)
        fitted = nmr.lorentzian_fit(data, 2)
        assert fitted[0].intensity == pytest.approx(1.0, rel=0.01)
        assert fitted[1].intensity == pytest.approx(0.7, rel=0.01)

    def test_one_percent_noise_ratio(self):
        rng = np.random.default_rng(12)
        freqs = np.linspace(-10.0, 13.0, 600)
        data = self.sample([(0.0, 1.0, 1.0), (3.0, 0.7, 1.0)], freqs)
        data[:, 1] += rng.normal(0.0, 0.01, data.shape[0])
        fitted = nmr.lorentzian_fit(data, 2)
        ratio = fitted[0].intensity / fitted[1].intensity
        assert abs(ratio - 1.0 / 0.7) / (1.0 / 0.7) < 0.03

    def test_too_few_samples_diverges(self):
        with pytest.raises(FitDiverged):
            nmr.lorentzian_fit(np.array([[0.0, 1.0], [1.0, 0.5], [2.0, 0.2]]), 2)

    def test_synthesize_then_fit_round_trip(self):
        s = hhl.linear_system(A_DEMO, [1.0, 0.0])
        state = hhl.theoretical_final_state(s, hhl.SolverConfig(rotation_mode="exact"))
        molecule = nmr.default_molecule()
        spectrum = nmr.synthesize_spectrum(state.density(), molecule)
        centers = np.array([p.center for p in spectrum.peaks])
        freqs = np.linspace(centers.min() - 20.0, centers.max() + 20.0, 4096)
        data = np.column_stack([freqs, spectrum.sample(freqs)])
        initial = np.empty(24)
        initial[0::3] = centers
        initial[1::3] = [p.intensity for p in spectrum.peaks]
        initial[2::3] = molecule.linewidth
        fitted = nmr.lorentzian_fit(data, 8, initial=initial)
        for peak, fit in zip(spectrum.peaks, fitted):
            assert abs(fit.intensity - peak.intensity) < 1e-6


class TestMoleculeParams:
    def test_rejects_asymmetric_couplings(self):
        j = np.zeros((4, 4))
        j[0, 1] = 5.0
        with pytest.raises(DimensionMismatch):
            nmr.MoleculeParams(j_couplings=j)

    def test_rejects_bad_t2(self):
        with pytest.raises(ValueError):
            nmr.MoleculeParams(t2_star_ms=(1.0, 1.0, -1.0, 1.0))
