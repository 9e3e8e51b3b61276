"""Uniform 1-D sinc-DVR grid and kinetic-energy matrix."""

from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class DvrGrid:
    """Uniform grid on [r_min, r_max] with n_points points (endpoints included)."""

    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise GridError(f"need at least 2 grid points, got {self.n_points}")
        if not self.r_max > self.r_min:
            raise GridError(f"empty grid range [{self.r_min}, {self.r_max}]")

    @property
    def spacing(self) -> float:
        return (self.r_max - self.r_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_points)

    def refined(self, factor: int = 2) -> "DvrGrid":
        """Grid with `factor` times as many points over the same range."""
        return DvrGrid(self.r_min, self.r_max, factor * self.n_points)


def sinc_kinetic(grid: DvrGrid, mass: float) -> np.ndarray:
    """Sinc-DVR kinetic-energy matrix for a particle of the given mass.

    Diagonal: (hbar^2/2m) * pi^2/(3 dr^2) * (1 + 2/N^2).
    Off-diagonal: (hbar^2/2m) * 2 (-1)^(j-i) pi^2 / (dr N sin(pi (j-i)/N))^2.
    """
    n = grid.n_points
    dr = grid.spacing
    pref = HBAR**2 / (2.0 * mass)

    j, i = np.meshgrid(np.arange(n), np.arange(n))
    diff = j - i
    t = np.empty((n, n))
    # off-diagonal first; the diagonal of sin(0) is patched afterwards
    with np.errstate(divide="ignore", invalid="ignore"):
        t = pref * 2.0 * (-1.0) ** diff * np.pi**2 / (dr * n * np.sin(np.pi * diff / n)) ** 2
    np.fill_diagonal(t, pref * np.pi**2 / (3.0 * dr**2) * (1.0 + 2.0 / n**2))
    return t
