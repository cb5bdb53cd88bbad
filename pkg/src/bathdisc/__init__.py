"""Gauss-quadrature discretisation of bosonic baths with rigorous error bounds."""

from .bounds import (BoundInputs, CorrelationMatrix, bound, bound_curve, bound_inputs,
                     bound_multibath, bound_theorem1, bound_theorem2, gamma_basis_change,
                     gamma_norm_from_blocks, gamma_norm_number_state, plan_modes,
                     symplectic_defect)
from .discretize import (BathEntry, ChainCoefficients, DiscretizedBath, MultiBathSpec,
                         assemble_multibath, chain_coefficients, chain_to_star, discretize)
from .errors import (BathDiscError, ConvergenceError, DimensionError, IllConditionedError,
                     NumericalError, RangeError, SaturationError, UnsupportedFamilyError,
                     ValidationError)
from .measures import Measure, SpectralDensity, eta_constants
from .orthopoly import (GaussRule, RecurrenceCoefficients, buell_bounds,
                        chebyshev_knots_closed_form, gauss_rule, recurrence)

__version__ = "0.1.0"
