"""Desk-scale computations around small gaps between primes."""
from gapslab._backend import BACKEND

__version__ = "0.1.0"
