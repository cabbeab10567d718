"""Relaxed graph area of the vortex map: free-boundary minimization and explicit approximating maps."""

__version__ = "0.1.0"
