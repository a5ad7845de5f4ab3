"""Photo-detector models on truncated Fock and discretized-frequency spaces.

Composable channels and measurements covering number resolution, bucket
detection, finite efficiency, dark counts, dead-time, spectral resolution
and bandwidth, plus the two standard applications: heralded single-photon
purity from a down-conversion pair, and two-photon interference dips.
"""

__version__ = "0.1.0"

from .backend import active_backend
from .errors import (
    CoverageError,
    EnumerationLimitError,
    GridMismatchError,
    KernelConstraintError,
    ModelConsistencyWarning,
    ModelError,
    ParameterError,
    PhotodetectError,
    TruncationError,
)
from .fock import (
    DetectorSpec,
    FockDensityMatrix,
    ThermalSource,
    beamsplitter_matrix,
    beamsplitter_two_mode,
    dark_count_probs,
    fock_state,
    loss_channel,
    measure_with_dark_counts,
    normalize,
    number_projector,
    partial_trace,
    project_click,
    project_no_click,
    project_number,
    pure_state,
    tensor,
    thermal_state,
    two_mode_pure,
)
from .hom import (
    HomConfig,
    coincidence_analytic,
    coincidence_detector_dressed,
    coincidence_simulated,
    delay_scale,
    gamma_overlap,
    visibility,
)
from .multiplex import (
    ClickDistribution,
    NPortSpec,
    TdmSpec,
    nport_click_distribution,
    nport_oracle,
    resolution_fidelity,
    tdm_bin_probabilities,
    tdm_click_distribution,
)
from .spectral import (
    FrequencyGrid,
    JointSpectralAmplitude,
    ResponseKernel,
    SpectralAmplitude,
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
from .temporal import (
    ClickStream,
    DeadTimeModel,
    eta_of_t,
    expected_observed_rate,
    load_click_stream,
    observed_rate_std_error,
    poisson_arrivals,
    save_click_stream,
    simulate_clicks,
)
