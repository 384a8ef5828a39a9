"""Link-level simulator for modulation over doubly-selective channels.

Five carrier families (OFDM, AFDM, ODDM, OTSM, Zak-OTFS) over the same
cyclic delay-Doppler channel model, with executable non-selectivity /
predictability / equivalence checks and a Monte-Carlo BER and channel
estimation harness.
"""
from .frame import (FrameConfig, SeededRng, make_frame_config,
                    qam_constellation, qam_map, qam_demap)
from .bases import (AfdmParams, Basis, Scheme, change_of_basis,
                    generate_basis, gram_matrix, load_basis, save_basis)
from .channel import (PhysicalChannel, Pulse, SpreadingFunction,
                      add_noise, apply_discrete_channel,
                      apply_physical_channel, crystallization_mask,
                      dense_on_grid_channel, discretize_physical_channel,
                      gaussian_sinc_pulse, operator_matrix,
                      physical_channel_to_csv, sample_on_grid_channel,
                      sample_veh_a, signed_doppler_bins,
                      spreading_from_operator)
from .transceiver import (AmbiguitySurface, EffectiveChannel,
                          build_effective_h, cross_ambiguity,
                          default_estimation_window, default_pilot_index,
                          estimate_pilot_channel, mmse_detect, modulate,
                          project, twisted_convolve)
from .properties import (PropertyVerdict, check_carrier_uniformity,
                         check_non_selective, check_predictable,
                         equivalence_report, out_of_window_energy_fraction,
                         per_carrier_energy, strong_crystallization_afdm,
                         verdicts_to_csv, verdicts_to_text,
                         weak_crystallization_support)
from .experiments import (ExperimentConfig, ResultRow, afdm_delta_sweep,
                          default_config, load_config_file, nmse_samples,
                          run_ber, run_energy_profile, run_nmse,
                          run_property_suite, write_result_csv)

__version__ = "0.1.0"
