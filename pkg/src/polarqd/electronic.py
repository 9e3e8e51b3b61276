"""Adiabatic electronic structure of the Shin-Metiu model on a sinc-DVR grid.

Two solver paths produce identical data:

* a dense path (`solve_adiabatic`) that diagonalizes the full grid
  Hamiltonian, used by the public operations and as the authority in tests;
* a reduced Galerkin path (`ReducedSolver`) that diagonalizes the Hamiltonian
  projected onto a fixed subspace spanned by eigenvectors collected at anchor
  geometries.  The subspace is validated against the dense path at build time
  (energies to ~1e-11), so downstream consumers cannot tell the two apart at
  the tolerances used anywhere in this package.  Trajectory ensembles use the
  reduced path; anything outside its validated range falls back to the dense
  path geometry by geometry.
"""

from dataclasses import dataclass, field

import numpy as np

from . import shin_metiu as sm
from .errors import ContinuityError, DegeneracyError, ConstructionError
from .grid import DvrGrid, sinc_kinetic

DEGENERACY_TOL = 1e-12

_kinetic_cache: dict = {}


def _cached_kinetic(grid: DvrGrid, mass: float) -> np.ndarray:
    key = (grid, mass)
    if key not in _kinetic_cache:
        _kinetic_cache[key] = sinc_kinetic(grid, mass)
    return _kinetic_cache[key]


def build_electronic_hamiltonian(grid: DvrGrid, params: sm.SmParams, R: float) -> np.ndarray:
    """Grid-basis electronic Hamiltonian T_e + V_eN(r) + V_ep(r, R) + V_NN(R)."""
    h = _cached_kinetic(grid, params.electron_mass).copy()
    v = sm.electronic_potential(grid.points, R, params)
    if not np.all(np.isfinite(v)):
        raise ConstructionError(f"non-finite electronic potential at R={R}")
    h[np.diag_indices_from(h)] += v
    return h


@dataclass
class AdiabaticSet:
    """Eigendata of the electronic Hamiltonian at one nuclear geometry.

    coeffs columns are the grid expansions of the adiabatic states (real,
    orthonormal); dipole is mu_ab = <a|(R - r)|b>; hf_grad is the matrix
    <a|dH/dR|b> whose diagonal is the adiabatic gradient and whose
    off-diagonal equals nac * (E_b - E_a).
    """

    geometry_r: float
    energies: np.ndarray          # (n,)
    coeffs: np.ndarray            # (n_grid, n)
    dipole: np.ndarray            # (n, n)
    hf_grad: np.ndarray           # (n, n)
    nac: np.ndarray               # (n, n), antisymmetric
    grid: DvrGrid = field(repr=False, default=None)

    @property
    def n_states(self) -> int:
        return self.energies.size


# ---------------------------------------------------------------------------
# batched kernels (leading axis = geometry); the public single-geometry
# operations are thin wrappers over batch size one
# ---------------------------------------------------------------------------

def _phase_fix_default(coeffs):
    """Make the first coefficient of magnitude > 1e-12 positive, per state."""
    g, n = coeffs.shape[0], coeffs.shape[2]
    for a in range(n):
        block = coeffs[:, :, a]
        mask = np.abs(block) > 1e-12
        first = np.argmax(mask, axis=1)
        signs = np.sign(block[np.arange(g), first])
        coeffs[:, :, a] *= signs[:, None]
    return coeffs


def _phase_align(coeffs, ref_coeffs):
    """Flip state signs so the overlap with the reference state is >= 0.

    Returns the |overlap| diagonal so callers can detect continuity loss.
    """
    ov = np.einsum("gia,gia->ga", ref_coeffs, coeffs)
    signs = np.where(ov < 0.0, -1.0, 1.0)
    coeffs *= signs[:, None, :]
    return coeffs, np.abs(ov)


def _sandwich_diag(coeffs, w):
    """c^T diag(w) c for a batch: (g, ngrid, n) x (g, ngrid) -> (g, n, n)."""
    return np.matmul(coeffs.transpose(0, 2, 1), coeffs * w[:, :, None])


def _dipole_batch(coeffs, r_points, R):
    """mu_ab(R) = sum_i c_ia c_ib (R - r_i), batched over geometries."""
    return _sandwich_diag(coeffs, R[:, None] - r_points[None, :])


def _hf_batch(coeffs, r_points, R, params):
    """<a| dH/dR |b> from the closed-form potential derivative, batched."""
    w = sm.electronic_potential_dR(r_points[None, :], R[:, None], params)
    return _sandwich_diag(coeffs, w)


def _nac_batch(hf, energies):
    """d_ab = hf_ab / (E_b - E_a) off-diagonal; zero diagonal.

    Returns (nac, bad) where bad flags geometries with a quasi-degenerate
    pair among the kept states.
    """
    de = energies[:, None, :] - energies[:, :, None]  # E_b - E_a
    off = ~np.eye(energies.shape[1], dtype=bool)
    bad = np.any(np.abs(de[:, off]) < DEGENERACY_TOL, axis=1)
    de_safe = np.where(np.abs(de) < DEGENERACY_TOL, 1.0, de)
    nac = np.where(off[None, :, :], hf / de_safe, 0.0)
    return nac, bad


# ---------------------------------------------------------------------------
# public single-geometry operations
# ---------------------------------------------------------------------------

def solve_adiabatic(
    grid: DvrGrid,
    params: sm.SmParams,
    R: float,
    n_states: int,
    phase_reference: AdiabaticSet | None = None,
) -> AdiabaticSet:
    """Dense solve of the lowest n_states adiabatic states at geometry R."""
    if n_states > grid.n_points:
        raise ValueError(f"n_states={n_states} exceeds grid size {grid.n_points}")
    if phase_reference is not None and phase_reference.grid != grid:
        raise ValueError("phase_reference was solved on a different grid")
    h = build_electronic_hamiltonian(grid, params, R)
    vals, vecs = np.linalg.eigh(h)
    energies = vals[:n_states]
    if np.any(np.diff(energies) < DEGENERACY_TOL):
        raise DegeneracyError(f"quasi-degenerate states at R={R}: {energies}")
    coeffs = vecs[:, :n_states][None, :, :].copy()
    if phase_reference is None:
        coeffs = _phase_fix_default(coeffs)
    else:
        coeffs, _ = _phase_align(coeffs, phase_reference.coeffs[None, :, :])
    return _finish_set(grid, params, R, energies, coeffs[0])


def _finish_set(grid, params, R, energies, coeffs) -> AdiabaticSet:
    Rb = np.array([R], dtype=float)
    cb = coeffs[None, :, :]
    dip = _dipole_batch(cb, grid.points, Rb)[0]
    hf = _hf_batch(cb, grid.points, Rb, params)[0]
    nac, bad = _nac_batch(hf[None], energies[None])
    if bad[0]:
        raise DegeneracyError(f"quasi-degenerate pair at R={R}")
    return AdiabaticSet(
        geometry_r=float(R),
        energies=np.asarray(energies, dtype=float),
        coeffs=np.asarray(coeffs, dtype=float),
        dipole=dip,
        hf_grad=hf[0],
        nac=nac[0],
        grid=grid,
    )


def dipole_matrix(aset: AdiabaticSet, grid: DvrGrid) -> np.ndarray:
    """mu_ab = sum_i c_ia c_ib (R - r_i) on the DVR grid."""
    Rb = np.array([aset.geometry_r])
    return _dipole_batch(aset.coeffs[None], grid.points, Rb)[0]


def hellmann_feynman(aset: AdiabaticSet, grid: DvrGrid, params: sm.SmParams, R: float):
    """(hf_grad, nac) from the analytic dH/dR sandwiched in the grid basis."""
    Rb = np.array([R], dtype=float)
    hf = _hf_batch(aset.coeffs[None], grid.points, Rb, params)
    nac, bad = _nac_batch(hf, aset.energies[None])
    if bad[0]:
        raise DegeneracyError(f"quasi-degenerate pair at R={R}")
    return hf[0], nac[0]


def state_overlap(set_a: AdiabaticSet, set_b: AdiabaticSet) -> np.ndarray:
    """S_ab = <phi_a(R_A)|phi_b(R_B)> via the common grid."""
    if set_a.coeffs.shape[0] != set_b.coeffs.shape[0]:
        raise ValueError("overlap requires both sets on the same grid")
    if set_a.grid is not None and set_b.grid is not None and set_a.grid != set_b.grid:
        raise ValueError("overlap requires both sets on the same grid")
    return set_a.coeffs.T @ set_b.coeffs


def dipole_derivative(
    grid: DvrGrid,
    params: sm.SmParams,
    R: float,
    delta_r: float = 1e-4,
    phase_reference: AdiabaticSet | None = None,
) -> np.ndarray:
    """Central finite difference of the dipole matrix, [mu(R+d) - mu(R-d)]/2d.

    Both displaced solves are sign-aligned to phase_reference; alignment
    weaker than |overlap| = 0.5 raises ContinuityError.
    """
    if delta_r <= 0:
        raise ValueError("delta_r must be positive")
    if phase_reference is None:
        raise ValueError("dipole_derivative requires a phase reference")
    n = phase_reference.n_states
    mus = []
    for Rd in (R + delta_r, R - delta_r):
        aset = solve_adiabatic(grid, params, Rd, n, phase_reference=None)
        cb = aset.coeffs[None, :, :]
        cb, ov = _phase_align(cb, phase_reference.coeffs[None, :, :])
        if np.any(ov < 0.5):
            raise ContinuityError(
                f"phase alignment lost between R={phase_reference.geometry_r} and R={Rd}"
            )
        mus.append(_dipole_batch(cb, grid.points, np.array([Rd]))[0])
    return (mus[0] - mus[1]) / (2.0 * delta_r)


# ---------------------------------------------------------------------------
# reduced Galerkin solver
# ---------------------------------------------------------------------------

@dataclass
class ReducedSolution:
    """Batch of electronic solves from the reduced path.

    coeffs are grid-basis expansions (same contract as AdiabaticSet.coeffs);
    vals_full/vecs_full are the complete reduced-space eigendata, consistent
    with coeffs = W @ vecs_full[:, :, :n].  Sign flips applied to coeffs must
    be applied to vecs_full in lockstep (see apply_signs).
    """

    energies: np.ndarray    # (g, n)
    coeffs: np.ndarray      # (g, n_grid, n)
    vals_full: np.ndarray   # (g, D)
    vecs_full: np.ndarray   # (g, D, D)

    def apply_signs(self, signs):
        n = self.energies.shape[1]
        self.coeffs *= signs[:, None, :]
        self.vecs_full[:, :, :n] *= signs[:, None, :]


class ReducedSolver:
    """Electronic solves in a fixed subspace spanned by anchor eigenvectors.

    The R-dependent part of the projected Hamiltonian is tabulated on a fine
    uniform R grid and evaluated by 4-point (cubic) Lagrange interpolation;
    the tabulation error is at machine level for the smooth erf kernels used
    here (verified at build time together with the subspace accuracy).
    """

    def __init__(
        self,
        grid: DvrGrid,
        params: sm.SmParams,
        n_states: int,
        r_lo: float = -9.0,
        r_hi: float = 9.0,
        anchor_spacing: float = 0.5,
        pad_states: int = 4,
        svd_tol: float = 1e-12,
        table_spacing: float = 0.005,
        validate: bool = True,
    ):
        self.grid = grid
        self.params = params
        self.n_states = n_states
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)

        r = grid.points
        n_keep = n_states + pad_states
        anchors = np.arange(r_lo, r_hi + 1e-9, anchor_spacing)
        bank = []
        for Ra in anchors:
            h = build_electronic_hamiltonian(grid, params, Ra)
            _, vecs = np.linalg.eigh(h)
            bank.append(vecs[:, :n_keep])
        bank = np.hstack(bank)
        u, s, _ = np.linalg.svd(bank, full_matrices=False)
        self.basis = np.ascontiguousarray(u[:, s > svd_tol * s[0]])  # (n_grid, D)
        self.dim = self.basis.shape[1]

        w = self.basis
        h0 = _cached_kinetic(grid, params.electron_mass) + np.diag(
            sm.electron_ion_potential(r, params)
        )
        self.h0_red = w.T @ h0 @ w
        self.r_red = w.T @ (r[:, None] * w)  # position operator in the subspace

        # tabulate W^T diag(V_ep(r; R)) W and its dR partner on a fine R grid
        self.table_lo = r_lo - 2 * table_spacing
        self.table_dr = table_spacing
        n_tab = int(np.ceil((r_hi - self.table_lo) / table_spacing)) + 4
        r_tab = self.table_lo + table_spacing * np.arange(n_tab)
        self.g_table = self._project_diag_batch(
            sm.electron_proton_potential(r[None, :], r_tab[:, None], params)
        )
        self.dg_table = self._project_diag_batch(
            sm.electron_proton_potential_dR(r[None, :], r_tab[:, None], params)
        )
        self.table_hi = r_tab[-1]

        self.validation_report = self._validate() if validate else None

    def _project_diag_batch(self, diag_vals):
        """W^T diag(v_g) W for a batch of diagonal potentials, via one GEMM."""
        g, ng = diag_vals.shape
        d = self.dim
        t1 = (diag_vals[:, :, None] * self.basis[None, :, :]).transpose(1, 0, 2)
        out = (self.basis.T @ t1.reshape(ng, g * d)).reshape(d, g, d)
        return np.ascontiguousarray(out.transpose(1, 0, 2))

    def _interp_table(self, table, R):
        """Cubic Lagrange interpolation of a tabulated matrix family at R."""
        x = (np.asarray(R, dtype=float) - self.table_lo) / self.table_dr
        k = np.clip(np.floor(x).astype(int), 1, table.shape[0] - 3)
        t = x - k
        # 4-point stencil at k-1 .. k+2
        wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0
        w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0
        w1 = -(t + 1.0) * t * (t - 2.0) / 2.0
        w2 = (t + 1.0) * t * (t - 1.0) / 6.0
        return (
            wm1[:, None, None] * table[k - 1]
            + w0[:, None, None] * table[k]
            + w1[:, None, None] * table[k + 1]
            + w2[:, None, None] * table[k + 2]
        )

    def in_range(self, R):
        return (R >= self.r_lo) & (R <= self.r_hi)

    def solve_batch(self, R) -> ReducedSolution:
        """Lowest-n eigendata at each geometry in R (1-D array)."""
        R = np.asarray(R, dtype=float)
        n = self.n_states
        inside = self.in_range(R)
        hred = self._interp_table(self.g_table, np.where(inside, R, self.r_lo))
        hred += self.h0_red[None, :, :]
        hred[:, np.arange(self.dim), np.arange(self.dim)] += sm.proton_ion_potential(
            np.where(inside, R, self.r_lo), self.params
        )[:, None]
        vals, vecs = np.linalg.eigh(hred)
        coeffs = np.matmul(self.basis[None, :, :], vecs[:, :, :n])
        sol = ReducedSolution(vals[:, :n].copy(), coeffs, vals, vecs)
        if not np.all(inside):
            for g in np.nonzero(~inside)[0]:
                self._dense_fill(sol, g, R[g])
        return sol

    def _dense_fill(self, sol, g, R):
        """Dense fallback for a geometry outside the validated range."""
        h = build_electronic_hamiltonian(self.grid, self.params, R)
        vals, vecs = np.linalg.eigh(h)
        n = self.n_states
        sol.energies[g] = vals[:n]
        sol.coeffs[g] = vecs[:, :n]
        # no reduced eigendata for this row; poison it so misuse is loud
        sol.vals_full[g] = np.nan
        sol.vecs_full[g] = np.nan

    def dipole_and_hf(self, sol: ReducedSolution, R):
        """Dipole, hf-gradient and NAC matrices for a solved batch."""
        R = np.asarray(R, dtype=float)
        r = self.grid.points
        dip = _dipole_batch(sol.coeffs, r, R)
        hf = _hf_batch(sol.coeffs, r, R, self.params)
        nac, bad = _nac_batch(hf, sol.energies)
        return dip, hf, nac, bad

    def dipole_derivative_subspace(self, sol: ReducedSolution, R):
        """Analytic d(mu)/dR with the identity resolved over the full subspace.

        d(mu)_ab = delta_ab + sum_g [d_ag mu_gb - mu_ag d_gb], where the sum
        runs over every subspace state.  Rows solved by the dense fallback
        (outside the table range) are flagged in the returned bad mask and
        must be recomputed by finite differences by the caller.
        """
        R = np.asarray(R, dtype=float)
        n = self.n_states
        bad = ~np.all(np.isfinite(sol.vals_full), axis=1)
        safe = np.where(self.in_range(R), R, self.r_lo)

        dg = self._interp_table(self.dg_table, safe)
        vec_n = sol.vecs_full[:, :, :n]
        # hf over (all states g, targets l): dVNN contributes only on g == l
        hf_all = np.matmul(sol.vecs_full.transpose(0, 2, 1), np.matmul(dg, vec_n))
        dvnn = sm.proton_ion_potential_dR(safe, self.params)
        hf_all[:, :n, :][:, np.arange(n), np.arange(n)] += dvnn[:, None]
        de = sol.energies[:, None, :] - sol.vals_full[:, :, None]  # E_l - E_g
        tiny = np.abs(de) < DEGENERACY_TOL
        np.copyto(de, 1.0, where=tiny)
        d_gl = hf_all / de
        idx = np.arange(n)
        d_gl[:, idx, idx] = 0.0
        bad |= np.any(tiny & (np.abs(hf_all) > 1e-8), axis=(1, 2))

        # mu over (all states g, targets l)
        m_gl = -np.matmul(sol.vecs_full.transpose(0, 2, 1), np.matmul(self.r_red[None], vec_n))
        m_gl[:, idx, idx] += safe[:, None]

        cross = np.matmul(d_gl.transpose(0, 2, 1), m_gl)
        dmu = cross + cross.transpose(0, 2, 1)
        dmu[:, idx, idx] += 1.0
        return dmu, bad

    def _validate(self):
        """Compare reduced and dense eigendata at off-anchor geometries."""
        rng = np.random.default_rng(7)
        probes = np.concatenate(
            [
                rng.uniform(self.r_lo, self.r_hi, 8),
                np.array([-4.0 + 0.25, 2.0 + 0.125, 0.33]),
            ]
        )
        sol = self.solve_batch(probes)
        worst_e = 0.0
        worst_v = 0.0
        for g, R in enumerate(probes):
            h = build_electronic_hamiltonian(self.grid, self.params, R)
            vals, vecs = np.linalg.eigh(h)
            worst_e = max(worst_e, np.max(np.abs(vals[: self.n_states] - sol.energies[g])))
            ov = np.abs(np.einsum("ia,ia->a", vecs[:, : self.n_states], sol.coeffs[g]))
            worst_v = max(worst_v, np.max(1.0 - ov))
        if worst_e > 1e-10 or worst_v > 1e-8:
            raise ConstructionError(
                f"reduced electronic basis failed validation: "
                f"dE={worst_e:.3e}, 1-|ov|={worst_v:.3e} (dim {self.dim})"
            )
        return {"dim": self.dim, "max_denergy": worst_e, "max_vec_err": worst_v}
