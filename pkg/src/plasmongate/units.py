"""Internal unit system.

Energies in eV, lengths in nm, times in fs. Charges enter only through
``E2`` (e^2 in Gaussian units). Linear conductivities are kept in units of
e^2/hbar and third-order conductivities in units of e^4/hbar * nm^2/eV^2.
"""

HBAR = 0.6582119569  # eV fs
E2 = 1.43996  # e^2, eV nm
V_FERMI = 1.0  # nm / fs, graphene Fermi velocity (configurable per Material)
PHONON_ENERGY = 0.2  # eV, optical phonon line
EV_FS2_PER_NM2_IN_KG = 1.602176634e-31
ELECTRON_MASS_KG = 9.1093837015e-31

# e^2/hbar expressed as a velocity (nm/fs)
SIGMA_UNIT = E2 / HBAR


def as_dict():
    return {
        "energy": "eV",
        "length": "nm",
        "time": "fs",
        "hbar_eV_fs": HBAR,
        "e2_eV_nm": E2,
        "sigma1_unit": "e^2/hbar",
        "sigma3_unit": "e^4/hbar * nm^2/eV^2",
        "mass_unit": "eV fs^2/nm^2",
        "mass_unit_in_kg": EV_FS2_PER_NM2_IN_KG,
        "phonon_line_eV": PHONON_ENERGY,
    }
