"""Latency-minimizing secure computation offloading with a hybrid
relay-reflecting intelligent surface: channel synthesis, alternating
optimization, and a seeded Monte Carlo sweep harness."""

from .channel import (ChannelSet, draw_rician, path_loss, phase_init_rng,
                      steering_ula, steering_upa, substream, synthesize_channels)
from .harness import (ALL_MODES, AXES, Record, ResultTable, SweepSpec, aggregate,
                      apply_axis, run_sweep, run_trial, trial_seed, write_csv)
from .optimizer import (SubproblemCoefficients, WaterfillAllocation,
                        dynamic_select_and_allocate, fixed_amplitude_update,
                        optimal_combiner, optimal_offload, optimal_phases,
                        run_alternating, subproblem_coefficients, water_fill)
from .rates import (EDGE_LATENCY_INF, HrrisState, Solution, achievable_rate,
                    active_power, effective_channel, latency, leakage_bound,
                    secrecy_rate, sinr)
from .scenario import (MODES, ComputeParams, ConfigError, DistanceSet, LinkValues,
                       Scenario, ValidationError, db_to_linear, dbm_to_watts,
                       default_upa_shape, linear_to_db, link_distances,
                       load_scenario, scenario_to_config, watts_to_dbm)

__version__ = "0.1.0"
