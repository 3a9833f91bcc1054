"""locmom: local averages and local variances of quantum observables on 1D
periodic grids, the Wigner and Margenau-Hill quasi-distributions behind
them, classical phase-space counterparts, and hydrodynamic consistency
checks under split-operator time evolution."""

from .core import (DEFAULT_MASK_EPS, GridSpec, RealProfile, Wavefunction,
                   apply_momentum_power, integrate, make_grid,
                   momentum_representation, momentum_to_position, normalize,
                   spatial_derivative)
from .errors import (ConfigError, LocmomError, PreconditionError,
                     SelfCheckError)
from .moments import (LocalProfile, ObservableSpec, VarianceDecomposition,
                      density_inequality_witness, direct_variance,
                      global_average, linear_action, local_density_S,
                      local_second_moment_S, local_value_S, local_variance_C,
                      local_variance_S, momentum_power, position_function,
                      sandwich_density, variance_decomposition)
from .phasespace import (CharacteristicSlice, QuasiDistribution,
                         bayes_product, characteristic_function_S,
                         conditional_momentum_S, margenau_hill_transform,
                         momentum_amplitudes_at, phase_space_local_moment,
                         phase_space_local_variance, variance_difference_term,
                         wigner_transform)
from .classical import (ClassicalObservable, ObservableDistribution,
                        PhaseSpaceDensity, classical_local_moment,
                        classical_local_variance,
                        classical_variance_decomposition, gaussian_density,
                        momentum_variable, observable_distribution,
                        position_variable, wigner_as_classical)
from .dynamics import (EvolutionTrace, Potential, PropagationConfig,
                       continuity_residual, euler_residual_W, free_potential,
                       gaussian_barrier, harmonic_potential,
                       kinetic_energy_densities, split_step_propagate)
from .states import (Gaussian, GaussianOracle, OscillatorEigenstate,
                     PlaneWave, StateRecipe, Superposition, gaussian_oracle,
                     parse_recipe, recipe_text, synthesize)

__version__ = "0.1.0"
