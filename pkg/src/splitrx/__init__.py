"""splitrx: MI analysis and simulation for multi-antenna ED-CD splitting receivers.

The package is organized as:

* :mod:`splitrx.model` -- domain types, validation, exact observation sampler
* :mod:`splitrx.mi_mc` -- Monte Carlo MI estimation via histogram entropies
* :mod:`splitrx.mi_closed` -- high-SNR closed-form MI and MI-gain expressions
* :mod:`splitrx.optimizer` -- optimal design, baselines, numeric verification
* :mod:`splitrx.sweep` -- experiment sweeps, figure presets, CSV output
"""

from .model import (CD_ONLY, ChannelVector, ConfigError, ED_ONLY, NoiseProfile,
                    Observation, ReceiverConfig, ReceiverDesign, SPLITTING,
                    TransmitConfig, sample_observation,
                    sample_observation_given_x, sample_observations, validate)
from .mi_mc import (EstimationError, McSettings, MiEstimate,
                    UndersampledHistogramWarning, estimate_entropy_histogram,
                    estimate_mi)
from .mi_closed import (AuxQuantities, GainReport, aux_quantities,
                        combined_noise_term, gain_asymptotic, gain_finite,
                        mi_approx, mi_cd, mi_egc, mi_max, mi_mrc)
from .optimizer import (CheckFailedError, NumericOptimum, OptimalDesign,
                        StationarityReport, egc_weights, golden_section_min,
                        mrc_weights, numeric_optimize, optimal_design,
                        optimal_rho, optimal_weights, rho_roots,
                        stationarity_check)
from .sweep import (DEFAULT_NOISE, ResultTable, SweepSpec, build_sweep_spec,
                    figure, parse_config_file, run_sweep)

__version__ = "0.1.0"
