"""Modular symbols of weight-2 Bianchi cusp forms over the Euclidean imaginary
quadratic fields, and the statistics of their distribution."""
from .coeffs import FormSpec
from .farey import enumerate_Q
from .modsym import eval_symbol, get_evaluator
from .quadfield import QuadInt, field, qi

__all__ = ["FormSpec", "QuadInt", "enumerate_Q", "eval_symbol", "field", "get_evaluator", "qi"]
