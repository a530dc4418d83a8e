"""Periodic points, equilibrium potentials and Fekete-type pair energies
of complex rational maps on the projective line."""

__version__ = "0.1.0"

from .errors import (ConditionWarning, DegenerateLift, DegreeCapExceeded,
                     EmptySample, FeketeDynError, IncompleteRoots,
                     InexactDivision, IntegralityViolation, MapSpecError,
                     NegativeA, NotGoodLift, PreimageSolveFailed,
                     RootFindingDiverged, UnknownObservable, ZeroDiscriminant,
                     ZeroInput)
from .geometry import (HomPoly, ProjPoint, RationalMapLift, load_map_spec,
                       normalize_good_lift, resultant, spherical_dist,
                       spherical_dist_matrix, wedge)
from .dynatomic import (Configuration, DynatomicPoly, disc, divisors,
                        dynatomic_degree, dynatomic_poly, moebius,
                        periodic_points)
from .potential import (GreenEvaluator, good_potential, green, hsia_kernel,
                        hsia_kernel_lifted, hsia_matrix,
                        holder_seminorm_estimate)
from .equilibrium import (EnergyBoundInputs, MeasureSampler, Observable,
                          frl_bound_A, get_observable, integrate,
                          mutual_energy_mc, sample_mu)
from .fekete import (EnergyReport, RateRow, RateTable, SamplerConfig,
                     baker_check, check_quasi_fekete, config_energy,
                     discrepancy, rate_table)
from .exact import (ArithReport, disc_exact, dynatomic_exact, factor_integer,
                    product_formula_report, resultant_exact, valuation)
