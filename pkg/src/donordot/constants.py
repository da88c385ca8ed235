"""Physical constants and the internal unit system.

All model arithmetic uses capacitances in aF, voltages in mV, energies in
meV, tunnel rates in Hz, temperatures in K and currents in A.  These units
fit together through one number: a single electron charge on one attofarad
is e/aF = 160.22 mV, and the same number gives e^2/aF in meV.  Hence an
island energy e^2/C_sigma is simply E_AF_MEV / C_sigma with C_sigma in aF.
"""

# elementary charge (C)
E_CHARGE = 1.602176634e-19

# e expressed in aF*mV; numerically also e^2/aF in meV
E_AF_MEV = 160.2176634

# Boltzmann constant (meV/K)
K_B_MEV = 8.617333262145177e-2

# conductance quantum e^2/h (S)
G_QUANTUM = 3.874045865169028e-5
