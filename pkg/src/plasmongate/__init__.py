"""Colliding graphene-nanoribbon plasmons as a two-qubit CZ gate.

Modules, bottom-up: ``numerics`` (special functions, root finding),
``conductivity`` (graphene optical response), ``ribbon`` (transverse
eigenmodes), ``dispersion`` (branches and local expansion), ``rates``
(one- and two-plasmon absorption), ``scattering`` (collision S-matrix and
wavepacket oracle), ``gate`` (fidelity, success probability, sweeps) and
``cli``/``io`` (command line and file output).
"""

__version__ = "0.1.0"
