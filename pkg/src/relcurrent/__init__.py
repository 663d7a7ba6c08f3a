"""Boost-generator commutator engine for relativistic probability currents.

Modules: ``lorentz`` (SL(2,C) and Wigner rotations), ``spin`` (spin matrices,
Wigner D, Dirac spinors), ``wavepacket`` (momentum-space amplitudes and the
unitary representation), ``operators`` (kernels, boost generator,
commutator expectations), ``audit`` (no-go and Dirac-control experiments)
and ``cli``.
"""

__version__ = "0.1.0"
