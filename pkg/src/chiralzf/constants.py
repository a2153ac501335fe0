"""Physical constants used across the package (SI unless noted)."""

HBAR = 1.054571817e-34  # J s
K_BOLTZMANN = 1.380649e-23  # J/K
MU0_OVER_4PI = 1e-7  # T m / A
DEBYE = 3.33564e-30  # C m per debye

# Gyromagnetic ratios in MHz/T (divide by 2*pi nowhere; these are gamma/2pi).
GAMMA_1H = 42.576
GAMMA_13C = 10.705
