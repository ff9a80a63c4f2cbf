"""Symmetric point-vortex relative equilibria on the sphere and their
stability."""

from . import core, dynamics, families, scan, slicebasis, stability

__all__ = ["core", "dynamics", "families", "scan", "slicebasis", "stability"]
