"""A-posteriori H¹ error bounds and regularity checks for u_t = -u_xxxx - (u_x²)_xx."""

from .bounds import (BoundSeries, OdeCoefficients, cp_type1, cp_type2, gronwall,
                     ode_oracle)
from .evolve import InitialDatum, SolverConfig, Trajectory, simulate, step
from .residual import CoefficientSeries, IntervalData, build_series, interval_data, residual_at
from .spectral import (ZeroMeanField, derivative, hneg1_norm, hp_norm, linf_bound,
                       nonlinear_term)
from .verify import (CONSTANTS, Constants, Verdict, check_smallness, method1, method2,
                     method3, t_star, verdict)

__version__ = "0.1.0"
