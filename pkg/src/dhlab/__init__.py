"""dhlab: a numerical laboratory for the inequality |l1 p1 + l2 p2 + l3 p3^k - omega| <= eta.

Exponential sums over primes, the Fejer detection kernel, arc decompositions
of the real line, continued-fraction machinery, bound-ratio experiments, and
direct enumeration of prime solutions along the cube scale sequence.
"""

from .arcs import ArcDecomposition, choose_parameters, eta_exponent, locate
from .diophantine import (Convergent, Expansion, RationalWitness, convergents,
                          cube_sequence, find_rational_witness, legendre_check,
                          vaughan_ratio)
from .errors import (DhlabError, DomainError, EmptyDomainError, GridStepError,
                     InsufficientTableError, ParameterError, PhaseBudgetError,
                     QuadratureError)
from .expsums import (KernelParams, SpectrumGrid, eval_grid, fejer_kernel,
                      fejer_kernel_hat, integer_exp_sum, integral_exp_sum,
                      prime_exp_sum)
from .harness import (ExperimentConfig, MeasureSample, run_lemma_suite,
                      run_theorem_experiment, sample_large_sum_measure)
from .norms import (MomentReport, QuadrupleCount, count_quadruples,
                    exp_sum_gap_l2, kernel_moment, moment_integral,
                    selberg_integral)
from .primes import PrimeTable, SumRange, primes_in_range, sieve, theta
from .solver import (ProblemInstance, SolutionRecord, enumerate_solutions,
                     main_term_scan, solution_integral, weighted_count)

__version__ = "0.1.0"
