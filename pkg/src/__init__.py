"""
MIMO SWIPT optimizer
Joint transmit covariance and power-splitting design with Monte Carlo benchmarks
"""

__version__ = "1.0.0"
