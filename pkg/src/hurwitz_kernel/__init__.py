"""Exact kernel for weighted Hurwitz products, their transforms, coalgebra
convolution, weighted species tensors and Dold-Kan type equivalences."""

__version__ = "0.1.0"
