"""Green's functions, heat kernels and wave propagators for linear field equations."""
from . import asympt, geometry, heat, odegreen, poisson, quadrature, specialfn, spectra, wave
from .errors import (
    BoundaryError,
    ConvergenceError,
    DegenerateError,
    DivergenceError,
    DomainError,
    FieldKernelError,
    InconsistentSourceError,
    NoInverseError,
    SingularityError,
    TurningPointError,
    UnsupportedOrderError,
)
from .heat import HeatKernelSpec, green_from_heat_kernel, heat_evolve, heat_kernel_flat, heat_kernel_modesum
from .odegreen import DampedOscillator, SymmetricGreenSpec, build_symmetric_green, sho_retarded_green, sho_solve
from .poisson import SourceDensity, box_green_modesum, coulomb_green, dirichlet_solve, multipole_static
from .spectra import DomainSpec, ModeBasis, box_modes, fourier_coeffs, sphere_modes
from .wave import SpacetimeEvent, causal_green, freq_green_4d, kirchhoff_evolve_4d

__version__ = "0.1.0"
