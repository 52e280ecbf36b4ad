"""Euler-operator calculus and Hardy/Sobolev-type inequalities on
homogeneous-group models, evaluated on a log-radial x sphere grid."""

__version__ = "0.1.0"

from .errors import (ConfigError, InvalidInputError, NumericError, PreconditionError,
                     TruncationError, TruncationWarning, UnsupportedError)
from .group_model import (GroupModel, QuasiNormSpec, RadialGrid, ball_volume,
                          build_sphere_quadrature, integrate_samples, polar_integrate, quasi_norm)
from .field import (Field, euler_adjoint_apply, euler_apply, inner_product, integral, lp_norm,
                    radial_derivative_apply, radialize, sphere_mean)
from .semigroup import (BesovResult, LineField, MellinSpectrum, TimeGrid, besov_norm, dilate,
                        euler_heat_kernel, euler_heat_spectral, from_line, generator_apply,
                        mellin, to_line)
from .report import InequalityReport, SharpnessResult, emit_report
from .inequalities import (COROLLARIES, BlissExtremizer, bliss_constant, check_bliss,
                           check_bliss_quad, check_corollary, check_gn, check_hardy,
                           check_sobolev_type, check_stubbe, sQ_constant, stubbe_extremizer)
from .maximal_hardy import (AFunctional, RadialWeightPair, a_functional, ball_mean,
                            check_max_hardy, geometric_mean_transform, necessity_probe, witness)
from .weighted_radial import (NonlocalEstimate, RadialWeightFn, check_critical_hardy,
                              check_prop63, check_thm61_additive, check_thm61_multiplicative,
                              check_thm62, check_uncertainty_hpw, log_weight, nonlocal_functional,
                              power_weight)
from .sharpness import probe_sharpness
from .constructors import CONSTRUCTORS, build_field
