"""External-memory star-stencil laboratory.

A two-level (M, B) machine that counts compulsory and non-compulsory block
transfers, banded data layouts with matching sweep algorithms, exact lattice
combinatorics for the isoperimetric machinery behind the I/O lower bound, and
a benchmark harness that compares measured transfer counts against the
closed-form bound constants.
"""

from emstencil.grid import GridSpec, StencilSpec, Topology
from emstencil.machine import Fidelity, IoStats, MachineConfig, Machine

__all__ = [
    "GridSpec",
    "StencilSpec",
    "Topology",
    "Fidelity",
    "IoStats",
    "MachineConfig",
    "Machine",
]
