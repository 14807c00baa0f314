"""Semi-analytic solver for the Klein-Gordon equation in de Sitter spacetime.

Modules:

* ``special``     -- 2F1 and Gamma with error control
* ``kernels``     -- the kernels E, K0, K1 for both mass regimes
* ``profiles``    -- compactly supported initial data with analytic derivatives
* ``wave``        -- flat wave propagators v_phi, V_phi
* ``desitter``    -- representation-formula solver, knot fast paths, source term
* ``fdref``       -- finite-difference reference solver
* ``huygens``     -- tail measurements and mass sweeps
* ``asymptotics`` -- large-time expansion at the knot mass
"""
from .desitter import CauchyProblem, SeparableForcing, SolutionField, solve, solve_many
from .errors import (
    BlowUpError,
    CFLError,
    ConvergenceError,
    DomainError,
    ImaginaryResidueError,
    KGError,
    PoleError,
)
from .fdref import FDConfig, fd_probe, fd_solve
from .huygens import HuygensReport, mass_sweep, measure_tail
from .kernels import KernelValue, MassParams
from .profiles import (
    FunctionProfile,
    PolynomialBump,
    RadialCombination,
    TruncatedGaussian,
    ZeroProfile,
    default_bump,
)

__version__ = "0.1.0"

__all__ = [
    "CauchyProblem",
    "SeparableForcing",
    "SolutionField",
    "solve",
    "solve_many",
    "MassParams",
    "KernelValue",
    "FDConfig",
    "fd_solve",
    "fd_probe",
    "HuygensReport",
    "measure_tail",
    "mass_sweep",
    "PolynomialBump",
    "TruncatedGaussian",
    "ZeroProfile",
    "RadialCombination",
    "FunctionProfile",
    "default_bump",
    "KGError",
    "DomainError",
    "PoleError",
    "ConvergenceError",
    "ImaginaryResidueError",
    "CFLError",
    "BlowUpError",
]
