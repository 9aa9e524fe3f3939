"""Probability and profitability model of proof-of-work mining.

Submodules:

* ``specfun``: log-gamma, Beta and regularized incomplete beta/gamma kernels
* ``mining_model``: block discovery laws and Catalan distributions
* ``doublespend``: double-spend success probabilities
* ``strategies``: revenue ratios of honest and withholding strategies
* ``nakamoto_profitability``: double spends that abandon when far behind
* ``dyck``: Dyck words and the selfish-mining cycle oracle
* ``simulator``: event-driven Monte Carlo
* ``cli``: command-line front end
"""

from .errors import BudgetError, ConfigError, ConvergenceError, DomainError
from .mining_model import NetworkParams

__all__ = ["NetworkParams", "DomainError", "ConvergenceError", "BudgetError", "ConfigError"]
__version__ = "0.1.0"
