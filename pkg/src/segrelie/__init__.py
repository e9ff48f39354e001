"""Infinitesimal symmetries of Segre-family PDE systems, computed exactly.

The pipeline runs from a holomorphized defining series (``segre``) or a
second-order system with first-order relations (``systems``) to its
determining equations (``lieeq``) and on to finite-type and dimension
analysis of those linear equations (``lintype``).
"""

__version__ = "0.1.0"
