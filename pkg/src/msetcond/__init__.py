"""Multisets over classes with subexponential counting sequences: exact counts,
asymptotics at the radius, Boltzmann and uniform samplers, and verification
experiments."""
from .classes import (BUILTIN_CLASSES, CountingSequence, Domain, RhoEstimate, SeriesValue,
                      SubexpReport, builtin_class, dump_sequence, estimate_rho, eval_C, evaluate_C,
                      load_sequence, sequence_from_coeffs, subexp_diagnostics)
from .enumeration import (AsymptoticModel, BivariateTable, PDistribution, RadiusSums,
                          asymptotic_gnN, brute_force_gnN, constant_A, exact_table,
                          p_distribution, ratio_grid)
from .exceptions import *  # noqa: F401,F403
from .rng import RandomStream
from .sampling import (BoltzmannParams, MultisetObject, SizeProfile, UniformSampler,
                       boltzmann_params, largest_component, remainder, sample_boltzmann_Ggtm,
                       sample_gamma_C, sample_lambda_G, sample_uniform_gnN)
from .series import BiSeries, UniSeries, mset_exp, mset_product_form, plethysm

__version__ = "0.1.0"
