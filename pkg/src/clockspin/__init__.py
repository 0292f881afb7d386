"""Low-field clock transitions of an S=1/2, I=1/2 Kramers ion: level structure,
Zeeman gradients, ZEFOZ search, ESEEM envelopes, echo and Rabi signals, fits."""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig
from .dynamics import EchoMap, EchoModel, RabiTrace, echo_amplitude, echo_map, first_revival_ridge, rabi_trace
from .eseem import (EseemEnvelope, HostNucleus, dipolar_couplings, larmor_period, moment_vs_field_scan,
                    two_pulse_envelope)
from .fitting import (DecayCurve, FitError, StretchedExpFit, T2FieldFit, fit_stretched_exponential,
                      fit_t2_vs_field, resonator_q, stretched_exponential, t2_law)
from .spin import (EigenSystem, InteractionTensor, SpinSystem, TransitionTable, build_hamiltonian,
                   diagonalize, transition_table, zero_field_levels)
from .zeeman import (GradientMap, LevelGradient, S1Result, effective_moment, effective_spin_expectation,
                     level_gradient, s1_map, s1_transition_gradient, zefoz_search)
