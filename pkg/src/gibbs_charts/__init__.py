"""Gibbs measures on subshifts of finite type and Gibbs-chart smooth structures.

Subpackages and modules:

``sft``         admissible words, Perron-Frobenius data, periodic words
``potentials``  cylinder-table potentials, variation, Bowen reduction
``thermo``      transfer operators, pressure, eigen and invariant Gibbs measures
``markov``      toral automorphisms, Markov partitions, coding, periodic points
``torus``       trigonometric potentials pulled back to the coding
``charts``      coordinate functions and the synthesized smooth structure
``verify``      property checks with JSON-lines reports
``cli``         the ``gibbs-charts`` command
"""
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
