"""Non-Hermitian lattice spectra, skin-effect dynamics, and a gain/loss quantum walk.

The package is organized around five pieces: lattice models and their
complex spectra (model), wave-packet evolution engines and acceleration
formulas (dynamics), the coupled-fiber-loop discrete-time walk (walk),
fitting and plane-geometry utilities (analysis), and config/file handling
plus the command-line runner (io, cli).
"""

from .analysis import (
    FitReport,
    finite_difference_accel,
    fit_drift,
    fit_parabola,
    polygon_winding,
    polyline_distance,
    shoelace_area,
)
from .dynamics import (
    ComTrajectory,
    SpectralAmplitude,
    WaveState,
    amplitude_constraint_errors,
    bloch_propagate,
    center_of_mass,
    center_of_mass_spectral,
    com_trajectory,
    default_window,
    early_time_window,
    flat_amplitude,
    gaussian_amplitude,
    initial_acceleration_general,
    longwave_acceleration,
    lyapunov_exponent,
    normalized_amplitude,
    rk4_evolve,
    spectral_amplitude_of,
)
from .io import (
    ConfigError,
    ExperimentConfig,
    heatmap_svg,
    line_plot_svg,
    load_config,
    model_from_dict,
    model_to_dict,
    parse_config,
    serialize_config,
    write_csv,
    write_json,
    write_state_csv,
)
from .model import (
    DEFAULT_NK,
    LatticeModel,
    MaxImagResult,
    SpectralSummary,
    SpectrumCurve,
    dispersion_derivative,
    dispersion_pbc,
    drift_velocity,
    k_grid,
    locate_max_imag,
    max_group_speed,
    obc_matrix,
    obc_spectrum,
    predicted_acceleration,
    sample_pbc_spectrum,
    spectral_area_closed_form,
    spectral_area_quadrature,
    summarize,
)
from .walk import (
    BandPoint,
    WalkParams,
    WalkState,
    bloch_step_matrix,
    bloch_walk_reconstruction,
    closed_form_moments,
    effective_model,
    predicted_walk_acceleration,
    quasienergy_bands,
    single_pulse_initial,
    two_pulse_initial,
    walk_com,
    walk_com_trajectory,
    walk_run,
    walk_step,
    walk_window,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
