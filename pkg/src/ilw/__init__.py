"""Periodic traveling waves of the intermediate long wave (ILW) equation
u_t = d/dx (M_delta u - u^2): exact cnoidal-type profiles, their spectral
stability (Krein index, PF(2) test) and spectral time evolution."""
from .errors import (AdmissibilityError, BlowUpError, DomainError, ILWError, NumericalError,
                     PF2PreconditionError, RootNotFoundError, ShapeError, SingularityError,
                     UnboundedValueError, WindowError)
from .fourier import Grid, SpectralField, theta
from .krein import Verdict, krein_report
from .wave import WaveParams, WaveProfile, make_profile, wave_params

__version__ = "0.1.0"
