"""Born-Markov damping and diffusion of a Heisenberg SQUID chain coupled to
a phonon bath."""

from .dynamics import (DensityMatrix, StabilityError, Trajectory, evolve,
                       exact_state, gibbs_state, populations, coherences,
                       to_schrodinger, trace_distance)
from .entanglement import (EofSample, concurrence, entanglement_of_formation,
                           eof_bounds, eof_from_concurrence, fit_decay)
from .phonon_bath import (BathSpec, IntermediateRegime, coupling_regime,
                          effective_spectral_density, theta_oracle)
from .redfield import (Generator, RateTable, build_generator, chain_generator,
                       decoherence_rate, secular_filter, stationary_state,
                       transition_rates)
from .scenario import (ConfigError, RunReport, ScenarioConfig, emit_config,
                       parse_config, preset, run_scenario, sweep)
from .spin_chain import (ChainSpec, EigenSystem, build_hamiltonian,
                         eigensystem, interaction_operator,
                         interaction_operators_eigen, transition_network)

__version__ = "0.1.0"
