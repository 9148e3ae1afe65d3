"""Proper time of spin-1/2 particles as the expectation value of beta.

Submodules:

``spinor_algebra``      Dirac-representation matrices.
``invariance_solver``   the rate matrix from invariance constraints.
``momentum_dirac``      closed-form single-mode dynamics.
``wavepacket``          momentum-grid wavepackets, rate and proper time.
``foldy_wouthuysen``    lattice checks of the order-v^2 rate formula.
``si_estimator``        SI magnitude of the spin-field rate shift.
``cli``                 command-line interface.
"""
from .spinor_algebra import GammaBasis, build_gamma_basis

__all__ = ["GammaBasis", "build_gamma_basis"]
__version__ = "0.1.0"
