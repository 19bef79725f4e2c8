"""Statistical estimators and models for data on the sphere."""

from .models import (FAMILIES, CovarianceModel, VariogramFit, correlation,
                     cov_model, variogram_model, fit_variogram)
from .empirical import (PAIR_BUDGET, EmpiricalCurve, empirical_covariance,
                        empirical_variogram)
from .spectrum import (C_L, D_L, PowerSpectrum, SpectrumCovariance,
                       cov_from_power_spectrum, legendre_sum,
                       read_spectrum_csv, write_spectrum_csv)
from .measures import (entropy, first_minkowski, renyi_function, q_statistic,
                       qq_pairs, angular_marginals)
