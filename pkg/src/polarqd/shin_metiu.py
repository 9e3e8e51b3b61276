"""Asymmetric Shin-Metiu model: one proton and one electron between two fixed ions.

All potential terms are built from the softened Coulomb kernel erf(|x|/a)/|x|,
which is smooth and even in x.  The nuclear gradient of the electronic
Hamiltonian is available in closed form (erf'(z) = 2/sqrt(pi) exp(-z^2)).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

_TWO_OVER_SQRTPI = 2.0 / np.sqrt(np.pi)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SmParams:
    """Shin-Metiu model parameters (a.u.)."""

    L: float = 19.0          # donor-acceptor distance
    a_plus: float = 3.1      # softening length, +L/2 ion / electron
    a_minus: float = 4.0     # softening length, -L/2 ion / electron
    a_f: float = 5.0         # softening length, electron-proton
    mass_m: float = 1836.0   # proton mass
    electron_mass: float = 1.0

    def __post_init__(self):
        for name in ("L", "a_plus", "a_minus", "a_f", "mass_m", "electron_mass"):
            if not getattr(self, name) > 0:
                raise ModelError(f"{name} must be positive")


def soft_coulomb(x, a):
    """erf(x/a)/x, evaluated stably through x = 0 (limit 2/(sqrt(pi) a))."""
    x = np.asarray(x, dtype=float)
    z = x / a
    small = np.abs(z) < 1e-4
    zs = np.where(small, 0.0, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = erf(zs) / (zs * a)
    series = _TWO_OVER_SQRTPI / a * (1.0 - z**2 / 3.0 + z**4 / 10.0)
    return np.where(small, series, direct)


def soft_coulomb_deriv(x, a):
    """d/dx [erf(x/a)/x], stable through x = 0 (odd function, slope 0 at 0)."""
    x = np.asarray(x, dtype=float)
    z = x / a
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)  # placeholder value, masked out below
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = _TWO_OVER_SQRTPI * np.exp(-zs**2) / (zs * a**2) - erf(zs) / (zs * a) ** 2
    series = _TWO_OVER_SQRTPI / a**2 * (-2.0 * z / 3.0 + 2.0 * z**3 / 5.0)
    return np.where(small, series, direct)


def electron_ion_potential(r, params: SmParams):
    """Electron attraction to the two fixed ions; depends on r only."""
    return -soft_coulomb(r + params.L / 2.0, params.a_plus) - soft_coulomb(
        r - params.L / 2.0, params.a_minus
    )


def electron_proton_potential(r, R, params: SmParams):
    """Electron-proton attraction, a function of R - r only."""
    return -soft_coulomb(np.asarray(R) - np.asarray(r), params.a_f)


def proton_ion_potential(R, params: SmParams):
    """Bare Coulomb repulsion of the proton from the two fixed ions."""
    R = np.asarray(R, dtype=float)
    return 1.0 / np.abs(R + params.L / 2.0) + 1.0 / np.abs(R - params.L / 2.0)


def electron_proton_potential_dR(r, R, params: SmParams):
    """d/dR of the electron-proton term."""
    return -soft_coulomb_deriv(np.asarray(R) - np.asarray(r), params.a_f)


def proton_ion_potential_dR(R, params: SmParams):
    """d/dR of the proton-ion repulsion."""
    R = np.asarray(R, dtype=float)
    xp = R + params.L / 2.0
    xm = R - params.L / 2.0
    return -np.sign(xp) / xp**2 - np.sign(xm) / xm**2


def electronic_potential(r, R, params: SmParams):
    """Full electronic potential V(r; R) = V_eN(r) + V_ep(r, R) + V_NN(R)."""
    return (
        electron_ion_potential(r, params)
        + electron_proton_potential(r, R, params)
        + proton_ion_potential(R, params)
    )


def electronic_potential_dR(r, R, params: SmParams):
    """d/dR of the full electronic potential (the grad-H operator diagonal)."""
    return electron_proton_potential_dR(r, R, params) + proton_ion_potential_dR(R, params)
