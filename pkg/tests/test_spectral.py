import numpy as np
import pytest

from photodetect_sim import (
    CoverageError,
    DetectorSpec,
    FrequencyGrid,
    JointSpectralAmplitude,
    KernelConstraintError,
    ParameterError,
    ResponseKernel,
    SpectralDensityMatrix,
    condition_signal_kernel,
    condition_signal_tophat,
    finite_res_project_single,
    gaussian_amplitude,
    gaussian_jsa,
    normalize_density,
    purity,
    time_integrated_limit,
)
from photodetect_sim.spectral import (
    load_density_csv,
    load_jsa_csv,
    save_density_csv,
    save_jsa_csv,
)


@pytest.fixture(scope="module")
def grid128():
    return FrequencyGrid(-5.0, 5.0, 128)


def eigen_purity(rho):
    """Independent purity from the eigenvalue spectrum."""
    w = np.linalg.eigvalsh(rho.data)
    return float((w ** 2).sum() / w.sum() ** 2)


class TestGaussianAmplitude:
    def test_normalized(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        assert abs(psi.norm_sq() - 1.0) < 1e-9

    def test_symmetric_about_center(self):
        # odd point count puts a node exactly on the center
        grid = FrequencyGrid(-6.0, 6.0, 121)
        psi = gaussian_amplitude(grid, 0.0, 1.0)
        assert np.abs(psi.amp - psi.amp[::-1]).max() < 1e-12

    def test_self_overlap(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        overlap = abs(np.sum(psi.amp * psi.amp.conj()) * grid128.spacing)
        assert abs(overlap - 1.0) < 1e-9

    def test_coverage_enforced(self):
        grid = FrequencyGrid(-3.0, 3.0, 64)
        with pytest.raises(CoverageError):
            gaussian_amplitude(grid, 0.0, 1.0)

    def test_width_positive(self, grid128):
        with pytest.raises(ParameterError):
            gaussian_amplitude(grid128, 0.0, 0.0)


class TestGaussianJsa:
    def test_separable_is_rank_one(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.0)
        s = np.linalg.svd(jsa.amp, compute_uv=False)
        assert s[1] < 1e-9 * s[0]

    def test_correlated_has_schmidt_structure(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        s = np.linalg.svd(jsa.amp, compute_uv=False)
        assert s[1] > 1e-3

    def test_normalized(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.5)
        assert abs(jsa.norm_sq() - 1.0) < 1e-9

    def test_correlation_range(self, grid128):
        with pytest.raises(ParameterError):
            gaussian_jsa(grid128, grid128, correlation=1.0)


class TestFiniteResProjector:
    def test_full_window_is_identity(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        out, prob = finite_res_project_single(psi, 0.0, 100.0)
        assert np.array_equal(out.amp, psi.amp)
        assert abs(prob - 1.0) < 1e-9

    def test_disjoint_window(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        out, prob = finite_res_project_single(psi, 30.0, 1.0)
        assert prob == 0.0
        assert np.all(out.amp == 0.0)

    def test_window_mass_against_refined_quadrature(self):
        # edges at +-1 land on nodes at both resolutions; agreement is
        # limited by the half-cell edge bias of the rectangle rule
        coarse = FrequencyGrid(-5.0, 5.0, 101)
        fine = FrequencyGrid(-5.0, 5.0, 401)
        _, p_coarse = finite_res_project_single(
            gaussian_amplitude(coarse, 0.0, 1.0), 0.0, 1.0
        )
        psi_fine = gaussian_amplitude(fine, 0.0, 1.0)
        mask = np.abs(fine.omegas()) <= 1.0 + 1e-9 * fine.spacing
        p_fine = float(np.sum(np.abs(psi_fine.amp[mask]) ** 2) * fine.spacing)
        peak_density = float(np.abs(psi_fine.amp).max() ** 2)
        assert abs(p_coarse - p_fine) < (coarse.spacing + fine.spacing) * peak_density

    def test_probability_tracks_window_growth(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        probs = [finite_res_project_single(psi, 0.0, d)[1] for d in (0.5, 1.0, 2.0, 4.0)]
        assert np.all(np.diff(probs) > 0)


class TestConditioning:
    def test_separable_heralds_pure(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.0)
        det = DetectorSpec(omega0_macro=0.0, Delta=2.0, delta=0.5)
        rho = condition_signal_tophat(jsa, det)
        assert purity(rho) >= 0.99

    def test_strong_correlation_heralds_mixed(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.99)
        det = DetectorSpec(omega0_macro=0.0, Delta=10.0, delta=grid128.spacing)
        rho = condition_signal_tophat(jsa, det)
        p = purity(rho)
        assert p < 0.2
        assert abs(p - eigen_purity(rho)) < 1e-10

    def test_single_readout_heralds_pure(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.99)
        det = DetectorSpec(omega0_macro=0.0, Delta=grid128.spacing / 4, delta=1.0)
        rho = condition_signal_tophat(jsa, det)
        assert abs(purity(rho) - 1.0) < 1e-9

    def test_output_is_valid_state(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=0.4)
        rho = condition_signal_tophat(jsa, det)
        assert np.abs(rho.data - rho.data.conj().T).max() < 1e-10
        assert np.linalg.eigvalsh(rho.data)[0] > -1e-9
        assert 0.0 < rho.trace <= 1.0 + 1e-9

    def test_herald_probability_phase_invariant(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        shifted = JointSpectralAmplitude(
            grid128, grid128, jsa.amp * np.exp(1j * 0.83)
        )
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=0.4)
        a = condition_signal_tophat(jsa, det)
        b = condition_signal_tophat(shifted, det)
        assert abs(a.trace - b.trace) < 1e-12

    def test_empty_macro_window_rejected(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.5)
        det = DetectorSpec(omega0_macro=40.0, Delta=1.0, delta=0.5)
        with pytest.raises(CoverageError):
            condition_signal_tophat(jsa, det)

    def test_purity_ordering_across_limits(self):
        # same entangled pair probed in the three window regimes; source
        # width 0.05 keeps the wide-resolution case inside unit trace
        w = 0.05
        grid = FrequencyGrid(-5.2 * w, 5.2 * w, 128)
        jsa = gaussian_jsa(grid, grid, widths=(w, w), correlation=0.9)
        dw = grid.spacing
        single = condition_signal_tophat(
            jsa, DetectorSpec(omega0_macro=0.0, Delta=dw / 4, delta=w)
        )
        wide_res = condition_signal_tophat(
            jsa, DetectorSpec(omega0_macro=0.0, Delta=10 * w, delta=9 * w)
        )
        fine_res = condition_signal_tophat(
            jsa, DetectorSpec(omega0_macro=0.0, Delta=10 * w, delta=dw)
        )
        p1, p2, p3 = purity(single), purity(wide_res), purity(fine_res)
        assert p1 >= p2 - 1e-6
        assert p2 >= p3 - 1e-6
        assert p1 - p3 > 0.05

    def test_grid_refinement_stability_single_node(self):
        # microscopic window pinned to one node: free of the half-step
        # window-edge bias, converges far below the 1% budget
        values = []
        for n_points in (64, 128):
            grid = FrequencyGrid(-5.0, 5.0, n_points)
            jsa = gaussian_jsa(grid, grid, correlation=0.9)
            det = DetectorSpec(omega0_macro=0.0, Delta=20.0, delta=grid.spacing / 2)
            values.append(purity(condition_signal_tophat(jsa, det)))
        assert abs(values[1] - values[0]) / values[0] < 0.01

    def test_grid_refinement_stability_fixed_window(self):
        # fixed physical windows carry the half-step edge bias, O(spacing);
        # below 1% per doubling from a 256-point base
        values = []
        for n_points in (256, 512):
            grid = FrequencyGrid(-5.0, 5.0, n_points)
            jsa = gaussian_jsa(grid, grid, correlation=0.9)
            det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=0.5)
            values.append(purity(condition_signal_tophat(jsa, det)))
        assert abs(values[1] - values[0]) / values[0] < 0.01


class TestKernelConditioning:
    def test_tophat_kernel_matches_tophat_op(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        kernel = ResponseKernel("tophat", 0.0, 3.0, 0.4, 1.0)
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=0.4)
        a = condition_signal_kernel(jsa, kernel)
        b = condition_signal_tophat(jsa, det)
        assert np.abs(a.data - b.data).max() < 1e-10

    def test_kernel_scaling_linearity(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        base = ResponseKernel("tophat", 0.0, 3.0, 0.4, 1.0)
        scaled = ResponseKernel("tophat", 0.0, 3.0, 0.4, 0.37)
        a = condition_signal_kernel(jsa, base)
        b = condition_signal_kernel(jsa, scaled)
        assert abs(b.trace - 0.37 * a.trace) < 1e-12
        na, nb = normalize_density(a), normalize_density(b)
        assert np.abs(na.data - nb.data).max() < 1e-10

    def test_gaussian_kernel_purity_grows_with_resolution_width(self, grid128):
        # purity is invariant under peak scaling, so a modest fixed peak
        # keeps both settings inside the unit-trace regime
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        purities = []
        for delta in (0.1, 0.8):
            kernel = ResponseKernel("gaussian", 0.0, 3.0, delta, 0.2)
            purities.append(purity(condition_signal_kernel(jsa, kernel)))
        assert purities[1] > purities[0]

    def test_unit_bound_audit(self, grid128):
        good = ResponseKernel("tophat", 0.0, 3.0, 0.4, 1.0)
        assert good.validate_unit_bound(grid128) <= 1.0 + 1e-6
        bad = ResponseKernel("tophat", 0.0, 3.0, 0.8, 1.0)
        with pytest.raises(KernelConstraintError):
            bad.validate_unit_bound(grid128)
        jsa = gaussian_jsa(grid128, grid128, correlation=0.5)
        with pytest.raises(KernelConstraintError):
            condition_signal_kernel(jsa, bad)

    def test_with_max_peak_saturates(self, grid128):
        for form, delta in (("tophat", 0.7), ("gaussian", 0.3)):
            kernel = ResponseKernel(form, 0.0, 3.0, delta, 1.0).with_max_peak(grid128)
            worst = kernel.validate_unit_bound(grid128)
            assert 0.999 < worst <= 1.0 + 1e-6


class TestTimeIntegratedLimit:
    def test_separable_pure(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.0)
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0)
        assert purity(time_integrated_limit(jsa, det)) >= 0.99

    def test_diagonal_pair_gives_diagonal_state(self, grid128):
        # correlation high enough that the heralded coherence width drops
        # below one grid step: the matrix becomes numerically diagonal
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9999)
        det = DetectorSpec(omega0_macro=0.0, Delta=10.0)
        rho = time_integrated_limit(jsa, det)
        diag_max = np.abs(np.diag(rho.data)).max()
        off = rho.data - np.diag(np.diag(rho.data))
        assert np.abs(off).max() < 1e-3 * diag_max

    def test_matches_single_node_tophat_normalized(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=grid128.spacing / 2)
        a = normalize_density(condition_signal_tophat(jsa, det))
        b = normalize_density(time_integrated_limit(jsa, det))
        assert np.abs(a.data - b.data).max() < 1e-6


class TestPurity:
    def test_rank_one(self, grid128):
        psi = gaussian_amplitude(grid128, 0.0, 1.0)
        data = np.outer(psi.amp, psi.amp.conj()) * grid128.spacing
        data /= data.trace().real * 2.0  # sub-normalized rank-1
        rho = SpectralDensityMatrix(grid128, data)
        assert abs(purity(rho) - 1.0) < 1e-10

    @pytest.mark.parametrize("k", [2, 5, 16])
    def test_maximally_mixed(self, grid128, k):
        data = np.zeros((128, 128), complex)
        data[np.arange(k), np.arange(k)] = 1.0 / k
        rho = SpectralDensityMatrix(grid128, data)
        assert abs(purity(rho) - 1.0 / k) < 1e-10

    def test_matches_eigenvalue_oracle(self, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.7)
        det = DetectorSpec(omega0_macro=0.0, Delta=2.5, delta=0.3)
        rho = condition_signal_tophat(jsa, det)
        assert abs(purity(rho) - eigen_purity(rho)) < 1e-10

    def test_zero_trace_rejected(self, grid128):
        rho = SpectralDensityMatrix(grid128, np.zeros((128, 128)))
        with pytest.raises(ParameterError):
            purity(rho)


class TestCsvInterchange:
    def test_jsa_round_trip(self, tmp_path, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.6)
        path = tmp_path / "jsa.csv"
        save_jsa_csv(jsa, path)
        loaded = load_jsa_csv(path)
        assert loaded.grid1 == jsa.grid1 and loaded.grid2 == jsa.grid2
        assert np.array_equal(loaded.amp, jsa.amp)

    def test_density_round_trip(self, tmp_path, grid128):
        jsa = gaussian_jsa(grid128, grid128, correlation=0.9)
        det = DetectorSpec(omega0_macro=0.0, Delta=3.0, delta=0.4)
        rho = condition_signal_tophat(jsa, det)
        path = tmp_path / "rho.csv"
        save_density_csv(rho, path)
        loaded = load_density_csv(path)
        assert loaded.grid == rho.grid
        assert np.array_equal(loaded.data, rho.data)
