"""Physical constants and unit conversions.

All energies inside the package are expressed as frequencies in GHz
(energy / h).  Rates named ``g`` or ``gamma`` are ordinary frequencies
(MHz or 1/us as documented at each site); the factor 2*pi enters only
where an angular quantity is actually formed, e.g. inside Hamiltonian
assembly or Lorentzian linewidth expressions.

CODATA values are taken from :mod:`scipy.constants`.
"""

from scipy.constants import e as E_CHARGE  # elementary charge [C]
from scipy.constants import epsilon_0 as EPS0  # vacuum permittivity [F/m]
from scipy.constants import h as H_PLANCK  # Planck constant [J s]
from scipy.constants import hbar as HBAR  # reduced Planck constant [J s]

# One GHz of transition frequency, as an energy  [J]
J_PER_GHZ = H_PLANCK * 1e9

# One e*Angstrom of electric dipole moment  [C m]
CM_PER_EA = E_CHARGE * 1e-10

# Handy scale factors
UM3_PER_M3 = 1e18  # cubic micrometres per cubic metre
GHZ = 1e9  # Hz
MHZ = 1e6  # Hz


def dipole_energy_rate(p_parallel_ea: float, d_m: float) -> float:
    """Asymmetry tuning rate 2*p/d of a dipole across a plate gap, in GHz/V.

    A voltage V across a dielectric of thickness d produces the field V/d;
    a dipole projection p picks up the energy 2*p*V/d, i.e. the asymmetry
    energy responds at gamma = 2*p/d per volt.
    """
    return 2.0 * p_parallel_ea * CM_PER_EA / (d_m * J_PER_GHZ)


def rate_to_dipole(gamma_ghz_per_v: float, d_m: float) -> float:
    """Inverse of :func:`dipole_energy_rate`: p = gamma*d/2, in e*Angstrom."""
    return gamma_ghz_per_v * J_PER_GHZ * d_m / 2.0 / CM_PER_EA
