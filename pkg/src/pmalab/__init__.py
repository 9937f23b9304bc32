"""Simulation laboratory for pneumatic-muscle tracking control.

The package couples a three-element muscle plant with a second-order
disturbance observer, proxy-based and conventional sliding-mode control
laws, a closed-form feasibility gate for the gains, and a constrained
firefly tuner, plus a scenario harness reproducing the standard experiment
families (proxy-mass sweep, controller comparisons, load sweep).
"""

from .control import (ControlOutput, ProxyState, PsmcGains, Reference,
                      SmcGains, do_smc, ido_psmc, manifold_p, manifold_q,
                      proxy_step, psmc, smc)
from .errors import (BudgetExhaustedError, ConfigError,
                     InfeasibleGainsError, IntegrationDivergedError,
                     NoSolutionError, ObserverDivergedError,
                     ProxyDivergedError, SimulationDivergedError,
                     SingularGainError)
from .firefly import (FaConfig, Firefly, GenerationStats, attractiveness,
                      distance, move, run, tracking_objective)
from .harness import (CONTROLLERS, FAMILIES, FamilyRow, FamilySummary,
                      MetricsReport, Scenario, SimTrace, gate_scenario,
                      metrics, run_family, run_scenario)
from .observer import (ObserverGains, ObserverState, SymMatrix2,
                       error_matrix, estimation_error_bound, lambda1_bound,
                       observer_step, solve_lyapunov)
from .plant import (Coefficients, DisturbanceProfile, IDENTIFIED_PMA,
                    PlantState, PmaParams, acceleration, affine_terms,
                    coefficients, step)
from .presets import (BENCH_PMA, CHIRP_TRAJECTORY, COMPARE_DISTURBANCE,
                      DEFAULT_GAINS, DEFAULT_SMC, MISMATCH_SCALE,
                      SINE_TRAJECTORY, bench_scenario, comparison_scenario,
                      load_scenario, sweep_scenario)
from .stability import (StabilityReport, check_feasibility, kc_matrix,
                        km_matrix, lambda2, sq_asymptotic_bound, varpi)
from .trajectory import Trajectory, reference_at

__version__ = "0.1.0"
