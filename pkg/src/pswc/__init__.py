"""Phase-space Weyl calculus on deformed symplectic structures."""

__version__ = "0.1.0"
