"""Discretized-frequency states and finite-resolution spectral detection.

Frequencies live on a uniform grid; every sum carries the grid spacing as a
rectangle-rule quadrature weight.  Heralded conditional states are built by
summing the joint amplitude coherently over the microscopic window around a
readout frequency, then accumulating readout outcomes incoherently over the
macroscopic window.  Conditional states are returned unnormalized with the
heralding probability available as their trace.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import (
    CoverageError,
    KernelConstraintError,
    ModelConsistencyWarning,
    ParameterError,
)

HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
UNIT_BOUND_TOL = 1e-6


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform frequency grid, node-centered and endpoint-inclusive (rad/s)."""

    omega_min: float
    omega_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ParameterError("n_points must be >= 2")
        if not self.omega_max > self.omega_min:
            raise ParameterError("omega_max must exceed omega_min")

    @property
    def spacing(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)


def _window_mask(omegas: np.ndarray, center: float, halfwidth: float, spacing: float):
    # snap tolerance so nodes sitting exactly on a window edge stay inside
    return np.abs(omegas - center) <= halfwidth + 1e-9 * spacing


class SpectralAmplitude:
    """Single-photon amplitude psi(omega_i) on a frequency grid."""

    __slots__ = ("grid", "amp")

    def __init__(self, grid: FrequencyGrid, amp, normalized: bool = False):
        amp = np.asarray(amp, dtype=np.complex128)
        if amp.shape != (grid.n_points,):
            raise ParameterError("amplitude length must match the grid")
        self.grid = grid
        self.amp = amp
        if normalized and abs(self.norm_sq() - 1.0) > 1e-9:
            raise ParameterError(f"norm^2 = {self.norm_sq()!r}, expected 1")

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2) * self.grid.spacing)

    def normalized(self) -> "SpectralAmplitude":
        n2 = self.norm_sq()
        if n2 <= 0.0:
            raise ParameterError("cannot normalize a zero amplitude")
        return SpectralAmplitude(self.grid, self.amp / math.sqrt(n2), normalized=True)


class JointSpectralAmplitude:
    """Two-photon amplitude psi(omega1_i, omega2_j) on a grid pair."""

    __slots__ = ("grid1", "grid2", "amp")

    def __init__(self, grid1, grid2, amp, normalized: bool = False):
        amp = np.asarray(amp, dtype=np.complex128)
        if amp.shape != (grid1.n_points, grid2.n_points):
            raise ParameterError("amplitude shape must match the grid pair")
        self.grid1 = grid1
        self.grid2 = grid2
        self.amp = amp
        if normalized and abs(self.norm_sq() - 1.0) > 1e-9:
            raise ParameterError(f"norm^2 = {self.norm_sq()!r}, expected 1")

    def norm_sq(self) -> float:
        return float(
            np.sum(np.abs(self.amp) ** 2) * self.grid1.spacing * self.grid2.spacing
        )


class SpectralDensityMatrix:
    """Reduced spectral state; data[i, j] = rho(omega_i, omega_j) * spacing.

    With the spacing folded in, matrix traces and products approximate the
    continuum integrals directly: trace(data) is the state weight and
    trace(data @ data) the purity numerator.
    """

    __slots__ = ("grid", "data")

    def __init__(self, grid: FrequencyGrid, data, validate: bool = True):
        data = np.asarray(data, dtype=np.complex128)
        if data.shape != (grid.n_points, grid.n_points):
            raise ParameterError("density matrix shape must match the grid")
        self.grid = grid
        self.data = data
        if validate:
            self.validate()

    def validate(self):
        herm = np.abs(self.data - self.data.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise ParameterError(f"not Hermitian: max asymmetry {herm:.3e}")
        tr = self.data.trace()
        if abs(tr.imag) > TRACE_TOL:
            raise ParameterError(f"trace has imaginary part {tr.imag:.3e}")
        if tr.real < -TRACE_TOL:
            raise ParameterError(f"negative trace {tr.real!r}")
        if tr.real > 1.0 + TRACE_TOL:
            # unnormalized overlapping-window conditioning can over-count;
            # surfaced rather than masked
            warnings.warn(
                f"conditional state trace {tr.real!r} exceeds 1",
                ModelConsistencyWarning,
            )
        w = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))
        if w[0] < -PSD_TOL:
            raise ParameterError(f"not positive semidefinite: min eig {w[0]:.3e}")

    @property
    def trace(self) -> float:
        return float(self.data.trace().real)


@dataclass(frozen=True)
class ResponseKernel:
    """Detector response eta(omega0, omega) with a macroscopic envelope.

    form: 'tophat' or 'gaussian' microscopic profile of half-width delta
    around the readout frequency omega0; readouts are confined to
    [omega0_macro - Delta, omega0_macro + Delta]; peak is the response
    density (1/(rad/s)), bounded by the unit-efficiency audit.
    """

    form: str
    omega0_macro: float
    Delta: float
    delta: float
    peak: float

    def __post_init__(self):
        if self.form not in ("tophat", "gaussian"):
            raise ParameterError("form must be 'tophat' or 'gaussian'")
        if self.Delta < 0 or self.delta < 0 or self.peak < 0:
            raise ParameterError("Delta, delta and peak must be >= 0")
        if self.form == "gaussian" and self.delta == 0:
            raise ParameterError("gaussian form needs delta > 0")

    def efficiency(self, readout_omegas: np.ndarray, omegas: np.ndarray, spacing: float):
        """eta(omega0, omega) rows for the given readout frequencies."""
        d = omegas[None, :] - readout_omegas[:, None]
        if self.form == "tophat":
            inside = np.abs(d) <= self.delta + 1e-9 * spacing
            return self.peak * inside.astype(float)
        return self.peak * np.exp(-(d ** 2) / (2.0 * self.delta ** 2))

    def validate_unit_bound(self, grid: FrequencyGrid, tol: float = UNIT_BOUND_TOL):
        """Check sum over readouts of eta(omega0, omega)*d_omega0 <= 1 for all omega."""
        omegas = grid.omegas()
        sel = _macro_indices(grid, self.omega0_macro, self.Delta)
        eta = self.efficiency(omegas[sel], omegas, grid.spacing)
        worst = float((eta.sum(axis=0) * grid.spacing).max())
        if worst > 1.0 + tol:
            raise KernelConstraintError(
                f"effective efficiency reaches {worst!r} > 1; lower the peak"
            )
        return worst

    def with_max_peak(self, grid: FrequencyGrid) -> "ResponseKernel":
        """Rescale the peak to saturate the unit-efficiency bound on this grid."""
        probe = replace(self, peak=1.0)
        worst = probe.validate_unit_bound(grid, tol=math.inf)
        if worst <= 0.0:
            raise ParameterError("kernel has no support on the grid")
        return replace(self, peak=(1.0 - 1e-12) / worst)


# ---------------------------------------------------------------------------
# state factories


def gaussian_amplitude(grid: FrequencyGrid, center: float, width: float) -> SpectralAmplitude:
    """Normalized Gaussian amplitude exp(-(w-center)^2 / (2 width^2)).

    width is the amplitude standard deviation; the grid must span at least
    +-5 widths around the center.
    """
    if width <= 0.0:
        raise ParameterError("width must be > 0")
    if grid.omega_min > center - 5.0 * width or grid.omega_max < center + 5.0 * width:
        raise CoverageError("grid must span at least +-5 widths around the center")
    x = grid.omegas() - center
    amp = np.exp(-(x ** 2) / (2.0 * width ** 2)).astype(np.complex128)
    amp /= math.sqrt(float(np.sum(np.abs(amp) ** 2) * grid.spacing))
    return SpectralAmplitude(grid, amp, normalized=True)


def gaussian_jsa(
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    centers=(0.0, 0.0),
    widths=(1.0, 1.0),
    correlation: float = 0.0,
) -> JointSpectralAmplitude:
    """Normalized correlated bivariate Gaussian two-photon amplitude.

    correlation = 0 factorizes exactly (rank-1 amplitude); correlation -> +-1
    approaches the frequency-anticorrelated/correlated diagonal limit.
    """
    if not -1.0 < correlation < 1.0:
        raise ParameterError("correlation must lie in (-1, 1)")
    w1, w2 = widths
    c1, c2 = centers
    if w1 <= 0.0 or w2 <= 0.0:
        raise ParameterError("widths must be > 0")
    for grid, c, w in ((grid1, c1, w1), (grid2, c2, w2)):
        if grid.omega_min > c - 5.0 * w or grid.omega_max < c + 5.0 * w:
            raise CoverageError("grids must span at least +-5 widths around the centers")
    x1 = ((grid1.omegas() - c1) / w1)[:, None]
    x2 = ((grid2.omegas() - c2) / w2)[None, :]
    q = (x1 ** 2 - 2.0 * correlation * x1 * x2 + x2 ** 2) / (
        2.0 * (1.0 - correlation ** 2)
    )
    amp = np.exp(-q).astype(np.complex128)
    amp /= math.sqrt(
        float(np.sum(np.abs(amp) ** 2) * grid1.spacing * grid2.spacing)
    )
    return JointSpectralAmplitude(grid1, grid2, amp, normalized=True)


# ---------------------------------------------------------------------------
# detection operations


def finite_res_project_single(psi: SpectralAmplitude, omega0: float, delta: float):
    """Top-hat window projector on a single-photon amplitude.

    Zeroes the amplitude outside [omega0 - delta, omega0 + delta]; returns
    the unnormalized projected amplitude and its in-window probability.  An
    empty intersection gives a zero state with probability 0.
    """
    if delta < 0.0:
        raise ParameterError("delta must be >= 0")
    grid = psi.grid
    mask = _window_mask(grid.omegas(), omega0, delta, grid.spacing)
    out = np.where(mask, psi.amp, 0.0)
    prob = float(np.sum(np.abs(out) ** 2) * grid.spacing)
    return SpectralAmplitude(grid, out), prob


def _macro_indices(grid: FrequencyGrid, omega0: float, Delta: float) -> np.ndarray:
    if omega0 - Delta > grid.omega_max or omega0 + Delta < grid.omega_min:
        raise CoverageError("macroscopic window does not intersect the grid")
    omegas = grid.omegas()
    idx = np.nonzero(_window_mask(omegas, omega0, Delta, grid.spacing))[0]
    if idx.size == 0:
        # degenerate window narrower than the node spacing: single readout
        idx = np.array([int(np.argmin(np.abs(omegas - omega0)))])
    return idx


def condition_signal_tophat(jsa: JointSpectralAmplitude, detector) -> SpectralDensityMatrix:
    """Signal state heralded by a top-hat detector on the idler mode.

    For each readout node omega0 within the macroscopic window, the idler
    amplitude is summed coherently over |omega1 - omega0| <= delta; readout
    outcomes accumulate incoherently with weight d_omega0.  Unnormalized;
    the trace is the heralding weight.
    """
    grid1, grid2 = jsa.grid1, jsa.grid2
    sel = _macro_indices(grid1, detector.omega0_macro, detector.Delta)
    omegas = grid1.omegas()
    weights = np.zeros((sel.size, grid1.n_points))
    for row, a in enumerate(sel):
        weights[row] = _window_mask(omegas, omegas[a], detector.delta, grid1.spacing)
    data = _kernels.conditioned_density(
        weights, jsa.amp, grid1.spacing, grid1.spacing, grid2.spacing
    )
    return SpectralDensityMatrix(grid2, data)


def condition_signal_kernel(jsa: JointSpectralAmplitude, kernel: ResponseKernel) -> SpectralDensityMatrix:
    """Heralded signal state under a general response kernel.

    Generalizes the top-hat conditioning with sqrt(eta(omega0, omega1))
    inside the coherent sum so probabilities scale linearly with the kernel;
    the kernel must pass the unit-efficiency audit.
    """
    grid1, grid2 = jsa.grid1, jsa.grid2
    kernel.validate_unit_bound(grid1)
    sel = _macro_indices(grid1, kernel.omega0_macro, kernel.Delta)
    omegas = grid1.omegas()
    weights = np.sqrt(kernel.efficiency(omegas[sel], omegas, grid1.spacing))
    data = _kernels.conditioned_density(
        weights, jsa.amp, grid1.spacing, grid1.spacing, grid2.spacing
    )
    return SpectralDensityMatrix(grid2, data)


def time_integrated_limit(jsa: JointSpectralAmplitude, detector) -> SpectralDensityMatrix:
    """Delta-response readout hidden from the observer.

    The microscopic window collapses to single grid nodes: rho is the
    incoherent sum of idler rows psi(omega0, .) over the macroscopic window.
    Matches trace-normalized ``condition_signal_tophat`` at delta below the
    node spacing.
    """
    grid1, grid2 = jsa.grid1, jsa.grid2
    sel = _macro_indices(grid1, detector.omega0_macro, detector.Delta)
    rows = jsa.amp[sel, :]
    data = (rows.T @ rows.conj()) * (grid1.spacing * grid2.spacing)
    return SpectralDensityMatrix(grid2, data)


def purity(rho: SpectralDensityMatrix) -> float:
    """Tr(rho^2) / Tr(rho)^2."""
    tr = rho.trace
    if tr <= 0.0:
        raise ParameterError("purity undefined for a trace-zero state")
    tr2 = float(np.trace(rho.data @ rho.data).real)
    return tr2 / tr ** 2


def normalize_density(rho: SpectralDensityMatrix) -> SpectralDensityMatrix:
    tr = rho.trace
    if tr <= 0.0:
        raise ParameterError("cannot normalize a trace-zero state")
    return SpectralDensityMatrix(rho.grid, rho.data / tr)


# ---------------------------------------------------------------------------
# CSV interchange


def save_jsa_csv(jsa: JointSpectralAmplitude, path) -> None:
    """Real block stacked over imaginary block with a one-line grid header."""
    header = (
        f"jsa omega1_min={jsa.grid1.omega_min!r} omega1_max={jsa.grid1.omega_max!r} "
        f"n1={jsa.grid1.n_points} omega2_min={jsa.grid2.omega_min!r} "
        f"omega2_max={jsa.grid2.omega_max!r} n2={jsa.grid2.n_points}"
    )
    block = np.vstack([jsa.amp.real, jsa.amp.imag])
    np.savetxt(path, block, delimiter=",", fmt="%.17g", header=header)


def load_jsa_csv(path) -> JointSpectralAmplitude:
    with open(path) as fh:
        header = fh.readline()
    fields = dict(
        item.split("=") for item in header.lstrip("# ").split()[1:]
    )
    grid1 = FrequencyGrid(float(fields["omega1_min"]), float(fields["omega1_max"]), int(fields["n1"]))
    grid2 = FrequencyGrid(float(fields["omega2_min"]), float(fields["omega2_max"]), int(fields["n2"]))
    block = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n1 = grid1.n_points
    amp = block[:n1] + 1j * block[n1:]
    return JointSpectralAmplitude(grid1, grid2, amp)


def save_density_csv(rho: SpectralDensityMatrix, path) -> None:
    header = (
        f"density omega_min={rho.grid.omega_min!r} omega_max={rho.grid.omega_max!r} "
        f"n={rho.grid.n_points}"
    )
    block = np.vstack([rho.data.real, rho.data.imag])
    np.savetxt(path, block, delimiter=",", fmt="%.17g", header=header)


def load_density_csv(path) -> SpectralDensityMatrix:
    with open(path) as fh:
        header = fh.readline()
    fields = dict(item.split("=") for item in header.lstrip("# ").split()[1:])
    grid = FrequencyGrid(float(fields["omega_min"]), float(fields["omega_max"]), int(fields["n"]))
    block = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = grid.n_points
    return SpectralDensityMatrix(grid, block[:n] + 1j * block[n:])
