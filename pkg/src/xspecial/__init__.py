"""Extra special groups, quasifield Heisenberg loops, bricks and sum-product graphs."""

from .errors import *  # noqa: F401,F403
from .quasifield import QTable, bundled, dot, qf_hall, qf_load, qf_prime, qf_verify

__version__ = "0.1.0"
