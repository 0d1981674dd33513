"""Physical constants used throughout the package.

CODATA 2018 values, quoted to 9 significant digits.  k_B is exact in the
2019 SI.  This module is the single home for these numbers; nothing else
in the package hard-codes them.
"""

HBAR = 1.05457182e-34   # reduced Planck constant, J s
K_B = 1.38064900e-23    # Boltzmann constant, J/K
