"""qsheaf: quantum semantic sheaves on agent networks.

Models a network of communicating agents as a graph carrying a Hilbert
space per vertex and a quantum channel per edge, computes the
cohomological obstruction to global semantic agreement, simulates the
minimum-rate alignment protocol, and quantifies the quantum resources
(entanglement, contextuality, discord) that lower the alignment cost.
"""

__version__ = "0.1.0"

from . import align, errors, qcore, rand, resources, semantics, sheaf  # noqa: F401
