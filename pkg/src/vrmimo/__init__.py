"""Visibility-region non-stationary massive MIMO downlink simulator.

Channel covariances are built from a stationary correlation profile and a
per-user visibility-region mask; linear precoders (conjugate beamforming and
zero-forcing) are evaluated by seeded Monte Carlo, by large-system
deterministic equivalents, and -- for the structured worst/best placements
-- by closed forms.  See the README for the CLI and the CSV schema.
"""

from .errors import (ConfigError, DegenerateChannel, InvalidParam, InvalidScenario,
                     InvalidVR, NotPSD, ShapeError, SingularChannel, VrMimoError)
from .model import (AssumptionReport, CorrelationProfile, MaskMatrix, Normalization,
                    NonStationaryCovariance, PowerAllocation, SystemConfig,
                    VisibilityRegion, assumption_report, build_mask, build_theta,
                    exponential_correlation, hermitian_sqrt, identity_correlation)
from .sampling import (ChannelRealization, RngStream, draw_channel_matrix,
                       draw_noise_block, draw_user_channel)
from .precoding import (PrecodingMatrix, SinrVector, cb_precoder, link_level_validate,
                        sinr_cb_closed, sinr_general, sinr_zf_closed, zf_precoder)
from .asymptotics import (DetEquivReport, DiagApproxEntry, DiagApproxReport,
                          EpsilonStudy, NonnegativityCertificate, cb_det_equiv,
                          diagonal_approx_error, diagonal_approx_report,
                          epsilon_scaling_study, nonnegativity_certificate,
                          zf_det_equiv_approx)
from .scenarios import (ClosedFormValue, Placement, ScenarioSpec, best_tiling_feasible,
                        closed_form_sinr, place_best, place_random, place_stationary,
                        place_worst, scenario_covariances, scenario_regions)
from .config import ExperimentConfig, load_config, parse_config_file
from .experiment import (CSV_HEADER, McCell, ResultRow, ValidationReport, mc_cell_pair,
                         run_epsilon_study, run_single, run_sweep_d, run_validate,
                         write_rows)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
