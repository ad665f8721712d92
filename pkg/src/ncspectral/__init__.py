"""Spectral geometry workbench for deformed tori.

Modules:
    weyl         exact arithmetic in the deformed torus algebra
    clifford     gamma matrices, chirality, spinor conjugation
    operators    mode-level Dirac operators, gauge transport, dense oracles
    zeta         twisted lattice zeta series, continuation, residues
    diophantine  continued fractions, approximability scans, constructions
    action       heat traces, spectral-action fits, noncommutative integrals
    cli          reproducible experiment runner
"""

__version__ = "0.1.0"

from .weyl import DeformationMatrix, FourierElement  # noqa: F401
from .operators import OneForm, ModeMap, ModeWindow  # noqa: F401
from .zeta import TwistedSeries  # noqa: F401
from .action import CutoffProfile  # noqa: F401
