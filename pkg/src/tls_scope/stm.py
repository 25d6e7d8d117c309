"""Standard tunneling model: single-defect energies, couplings, design rules.

A tunneling two-level system (TLS) is described by its tunneling energy
Delta0 and a bias-dependent asymmetry energy

    eps(V) = eps_i + gamma_g*V_g + gamma_s*V_s + gamma_p*V_p,

giving the transition energy E = sqrt(Delta0^2 + eps^2) and the matrix
element Delta0/E.  All energies are frequencies in GHz (energy/h); the
three gamma coefficients are in GHz per volt of the respective control
(piezo, global gate, sample capacitor).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field

from .constants import HBAR, J_PER_GHZ, CM_PER_EA, EPS0, H_PLANCK

SCHEMA_VERSION = 1

#: Default cold-end limit on the sample-capacitor bias [V]; larger swings
#: heat the attenuators in the bias line.
V_S_LIMIT_DEFAULT = 2.5e-3


class Location(enum.Enum):
    """Possible host location of a TLS in the circuit."""

    SAMPLE_DIELECTRIC = "sample_dielectric"
    JUNCTION = "junction"
    STRAY_JUNCTION = "stray_junction"
    SURFACE_ELECTRODE = "surface_electrode"
    UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class TlsParams:
    """Parameters of one TLS.

    Attributes
    ----------
    delta0 : float
        Tunneling energy [GHz], strictly positive.
    eps_i : float
        Intrinsic asymmetry energy at zero bias [GHz].
    gamma_p, gamma_g, gamma_s : float
        Asymmetry tuning rates for piezo, global gate and sample
        capacitor voltage [GHz/V].
    p_parallel : float
        Electric dipole moment projection [e*Angstrom], >= 0; the sign of
        the projection is absorbed into ``gamma_s``.
    gamma1_tls, gamma2_tls : float
        Energy relaxation and dephasing rates [1/us].
    location : Location
        Host location, if known.
    """

    delta0: float
    eps_i: float = 0.0
    gamma_p: float = 0.0
    gamma_g: float = 0.0
    gamma_s: float = 0.0
    p_parallel: float = 0.0
    gamma1_tls: float = 0.0
    gamma2_tls: float = 2.0 * math.pi  # 2*pi MHz expressed in 1/us
    location: Location = Location.UNCLASSIFIED

    def __post_init__(self):
        if not self.delta0 > 0:
            raise ValueError(f"delta0 must be > 0, got {self.delta0}")
        if self.gamma1_tls < 0:
            raise ValueError("gamma1_tls must be >= 0")
        if self.gamma2_tls < self.gamma1_tls / 2:
            raise ValueError("gamma2_tls must be >= gamma1_tls/2")
        if self.p_parallel < 0:
            raise ValueError("p_parallel is a magnitude; sign lives in gamma_s")
        if self.location is Location.SAMPLE_DIELECTRIC and self.gamma_s == 0:
            raise ValueError("sample-dielectric TLS must respond to V_s")
        if self.location in (Location.JUNCTION, Location.STRAY_JUNCTION) and (
            self.gamma_g != 0 or self.gamma_s != 0
        ):
            raise ValueError("junction TLS are screened from both E-fields")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["location"] = self.location.value
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TlsParams":
        d = dict(d)
        version = d.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            from .errors import SchemaError

            raise SchemaError(f"unsupported TlsParams schema_version {version!r}")
        d["location"] = Location(d.get("location", "unclassified"))
        return cls(**d)


@dataclass(frozen=True)
class BiasPoint:
    """One setting of the three bias controls plus the qubit setpoint.

    ``v_s`` is the cold-end voltage on the sample capacitor; its magnitude
    is checked against ``v_s_limit`` (attenuator heating constraint).
    """

    v_p: float = 0.0
    v_g: float = 0.0
    v_s: float = 0.0
    qubit_freq: float = 0.0
    v_s_limit: float = V_S_LIMIT_DEFAULT

    def __post_init__(self):
        if abs(self.v_s) > self.v_s_limit:
            raise ValueError(
                f"|v_s| = {abs(self.v_s):.4g} V exceeds the "
                f"{self.v_s_limit:.4g} V safety limit"
            )


ZERO_BIAS = BiasPoint()


@dataclass(frozen=True)
class SensorDesign:
    """Geometry and electrical parameters of the sample-capacitor sensor.

    Attributes
    ----------
    d : float
        Sample dielectric thickness [m].
    area : float
        Capacitor plate area [m^2].
    eps_r : float
        Relative permittivity of the sample dielectric.
    c_tot : float
        Total capacitance shunting the qubit junctions [F].
    omega10 : float
        Qubit plasma frequency [rad/s].
    t1_qubit : float
        Energy relaxation time of the isolated qubit [us].
    """

    d: float
    area: float
    eps_r: float
    c_tot: float
    omega10: float
    t1_qubit: float

    def __post_init__(self):
        for name in ("d", "area", "eps_r", "c_tot", "omega10", "t1_qubit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        ratio = sample_capacitance(self) / self.c_tot
        if ratio > 0.05:
            warnings.warn(
                f"sample capacitor holds {ratio:.1%} of the total capacitance; "
                "it will load the qubit",
                stacklevel=2,
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SensorDesign":
        d = dict(d)
        version = d.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            from .errors import SchemaError

            raise SchemaError(f"unsupported SensorDesign schema_version {version!r}")
        return cls(**d)


# ---------------------------------------------------------------------------
# Single-TLS formulas
# ---------------------------------------------------------------------------

def asymmetry(tls: TlsParams, b: BiasPoint) -> float:
    """Bias-dependent asymmetry energy [GHz], linear in all three controls."""
    return tls.eps_i + tls.gamma_g * b.v_g + tls.gamma_s * b.v_s + tls.gamma_p * b.v_p


def transition_energy(tls: TlsParams, b: BiasPoint) -> float:
    """Transition energy E = sqrt(Delta0^2 + eps^2) [GHz]; E >= Delta0."""
    return math.hypot(tls.delta0, asymmetry(tls, b))


def matrix_element(tls: TlsParams, b: BiasPoint) -> float:
    """Dipole matrix element Delta0/E, in (0, 1]."""
    return tls.delta0 / transition_energy(tls, b)


def coupling_strength(tls: TlsParams, field_rms: float, b: BiasPoint) -> float:
    """Qubit-TLS coupling g [MHz, ordinary frequency].

    hbar*g_angular = p_parallel * (Delta0/E) * F, so the ordinary rate is
    p_parallel*(Delta0/E)*F / h.  ``field_rms`` is the rms electric field
    seen by the TLS [V/m].
    """
    if field_rms < 0:
        raise ValueError("field_rms must be >= 0")
    p_eff = tls.p_parallel * CM_PER_EA * matrix_element(tls, b)
    return p_eff * field_rms / H_PLANCK / 1e6


def vacuum_voltage(design: SensorDesign) -> float:
    """Vacuum voltage fluctuation sqrt(hbar*omega10 / (2*C_tot)) [V]."""
    return math.sqrt(HBAR * design.omega10 / (2.0 * design.c_tot))


def design_thickness(p_min: float, t1: float, v_rms: float) -> float:
    """Dielectric thickness [m] at which g*T1 = 1 for the weakest dipole.

    Detectability requires the coupling (angular) to match the qubit decay
    rate, g = 1/T1; substituting F = V_rms/d gives d = p_min*T1*V_rms/hbar.

    Parameters
    ----------
    p_min : float
        Smallest dipole projection to remain detectable [e*Angstrom].
    t1 : float
        Qubit energy relaxation time [s].
    v_rms : float
        Vacuum voltage fluctuation on the qubit island [V].
    """
    if p_min <= 0 or t1 <= 0 or v_rms <= 0:
        raise ValueError("p_min, t1 and v_rms must be positive")
    return p_min * CM_PER_EA * t1 * v_rms / HBAR


def sample_capacitance(design: SensorDesign) -> float:
    """Parallel-plate capacitance eps0*eps_r*A/d [F].

    No fringe-field correction is applied; measured values of overlap
    capacitors run 10-20% above this.
    """
    if design.d <= 0:
        raise ValueError("thickness must be positive")
    return EPS0 * design.eps_r * design.area / design.d


def capacitor_field_rms(design: SensorDesign) -> float:
    """Rms qubit field inside the sample capacitor, V_rms/d [V/m]."""
    return vacuum_voltage(design) / design.d


def dipole_to_gamma_s(p_parallel: float, d: float) -> float:
    """Sample-bias tuning rate gamma_s = 2*p/d [GHz/V] of a dipole p [e*A]."""
    return 2.0 * p_parallel * CM_PER_EA / (d * J_PER_GHZ)


def gamma_s_to_dipole(gamma_s: float, d: float) -> float:
    """Dipole projection p = |gamma_s|*d/2 [e*Angstrom] from the tuning rate.

    Note: published parameter tables sometimes quote p = gamma_s*d (without
    the factor 1/2, i.e. twice this value); this function follows the
    dipole-energy identity 2*p*V/d = gamma_s*V.
    """
    return abs(gamma_s) * J_PER_GHZ * d / 2.0 / CM_PER_EA
