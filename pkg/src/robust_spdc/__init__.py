"""Composite-segment SPDC crystals whose pair rate is insensitive to phase-mismatch errors."""

from .designer import (AntisymmetricFamily, DesignConstraints, SolveResult, build_family, quarter_period_length,
                       residuals, solve, validate)
from .errors import (CalibrationError, ConfigurationError, DegenerateDesignError, DesignFileError,
                     FabricationError, InsufficientRangeError, InvalidArgumentError, InvalidSegmentError,
                     NumericalConsistencyError, OracleError, RegimeViolationError, RobustSPDCError)
from .oracle import ode_oracle
from .poling import PolingPattern, format_pattern, parse_pattern, poling_pattern, recover_segments
from .robustness import (RobustnessReport, RobustnessSpec, SweepTable, auto_width_90, beta2_derivatives,
                         efficiency_ratio, flatness_integral, flatness_metric, matching_intensity_factor, reference_design,
                         scale_design, sweep, width_90, width_matched_length)
from .sensitivity import (DEFAULT_OMEGA, Axis, CalibrationDatum, SensitivityCoefficients, calibrate,
                          calibrate_all, default_coefficients, epsilon_from, width90_epsilon)
from .su11 import (Design, HyperboloidPoint, PhotonNumberDistribution, PumpPhysics, Segment, Su11Matrix,
                   compose, compute_kappa, design_matrix, design_mu, hyperboloid_point, multi_pair_probability,
                   mu_curve, pair_mean, periodically_poled, photon_statistics, segment_matrix, trajectory)

__version__ = "0.1.0"
