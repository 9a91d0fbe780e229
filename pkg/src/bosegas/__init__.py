"""Finite-volume statistical mechanics of a solvable Bose lattice gas.

The model couples a distinguished zero mode (negative energy eps0, on-site
repulsion g0) to free-dispersion excited modes with a common repulsion g.
It exhibits two condensation mechanisms: an interaction-driven macroscopic
zero mode for eps0 < mu <= 0, and saturation above a finite critical
density, where the repulsion smears the condensate over an infinitesimal
momentum shell (no single macroscopic excited mode).

The package computes exact finite-volume grand-canonical and canonical
statistics of the model, the closed-form thermodynamic-limit quantities,
and V-ladder studies connecting the two.
"""

from .errors import (ConfigError, DivergenceError, DomainError, NumericError,
                     ResourceError, SolverError)
from .lattice import (GaussianMix, Mode, ModelParams, TestFunction,
                      enumerate_modes, enumerate_shells, tf_coeff, zero_mode)
from .single_mode import (GrandSpec, ModePMF, mode_log_partition, mode_occupation,
                          mode_pmf, mode_weyl_factor, mode_weyl_factor_free,
                          occupation_bound_gap)
from .grand_canonical import (CondensateReport, DensityBreakdown, condensate_scan,
                              genfun_finite, solve_mu, total_density)
from .canonical import (canonical_genfun, canonical_partition, equivalence_gap,
                        free_energy_density)
from .tdlimit import (B_of_rho, LimitFunctional, LimitReport, constant_C,
                      genfun_limit, kac_mixture_check, limit_functional,
                      limit_report, mu_of_rho_limit, quad_form_A, rho_0_I,
                      rho_P, rho_c_I, rho_c_P)
from .experiments import (GenfunLadder, ScalingFit, TruncatedPair, CondensateTrend,
                          genfun_convergence_study, mu_scaling_study,
                          positivity_check, truncated_pair_study, typeIII_study,
                          write_study)
from . import specfun

__version__ = "0.1.0"
