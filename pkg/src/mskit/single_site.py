"""Single-site scattering for spherical model potentials.

Radial Schrodinger solutions by fixed-step Numerov integration of
u = r R, boundary-sphere Wronskians against Bessel/Hankel functions, and
the site t-matrix t = -S E^{-1}. Hartree atomic units throughout: the
radial equation is R'' + (2/r) R' + (2(E - V) - l(l+1)/r^2) R = 0.

A synthetic anisotropic t generator provides full-potential-like stress
inputs without any non-spherical potential machinery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .angmom import (n_angular, sph_bessel_j_all, sph_bessel_j_deriv,
                     sph_hankel_plus_all, sph_hankel_plus_deriv, wavenumber)
from .errors import MeshError, SingularMatrixError

__all__ = [
    "RadialPotential",
    "RadialSolution",
    "SiteMatrices",
    "square_well",
    "zero_potential",
    "soft_coulomb",
    "solve_radial_regular",
    "solve_radial_irregular",
    "wronskian_matrices",
    "t_matrix",
    "site_matrices",
    "synthetic_anisotropic_t",
    "load_potential",
    "save_potential",
]


@dataclass(frozen=True)
class RadialPotential:
    """Spherical potential sampled on a strictly increasing mesh ending at R_b."""

    mesh: np.ndarray        # radii, Bohr
    values: np.ndarray      # V(r_k), Hartree
    name: str = "custom"

    def __post_init__(self):
        mesh = np.asarray(self.mesh, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if mesh.ndim != 1 or mesh.size < 8:
            raise MeshError("mesh must be 1-D with at least 8 points")
        if mesh[0] <= 0.0:
            raise MeshError("mesh must start at r > 0")
        if np.any(np.diff(mesh) <= 0.0):
            raise MeshError("mesh must be strictly increasing")
        if values.shape != mesh.shape:
            raise MeshError("potential values must match the mesh")
        object.__setattr__(self, "mesh", mesh)
        object.__setattr__(self, "values", values)

    @property
    def r_b(self) -> float:
        return float(self.mesh[-1])


def _uniform_mesh(r_b: float, n: int) -> np.ndarray:
    # fixed-step mesh starting one step inside the origin
    return np.linspace(r_b / n, r_b, n)


def square_well(v0: float = -0.5, r_b: float = 2.0, n: int = 2001) -> RadialPotential:
    """Constant well of depth v0 inside the bounding sphere."""
    mesh = _uniform_mesh(r_b, n)
    return RadialPotential(mesh, np.full(n, v0, dtype=complex), name="square_well")


def zero_potential(r_b: float = 2.0, n: int = 2001) -> RadialPotential:
    mesh = _uniform_mesh(r_b, n)
    return RadialPotential(mesh, np.zeros(n, dtype=complex), name="zero")


def soft_coulomb(z: float = 1.0, softening: float = 0.3, r_b: float = 2.0,
                 n: int = 2001) -> RadialPotential:
    """-z / sqrt(r^2 + s^2), a smooth attractive test potential."""
    mesh = _uniform_mesh(r_b, n)
    return RadialPotential(mesh, -z / np.sqrt(mesh ** 2 + softening ** 2),
                           name="soft_coulomb")


@dataclass(frozen=True)
class RadialSolution:
    """Radial solution R_l with derivative on the potential mesh."""

    l: int
    energy: complex
    mesh: np.ndarray
    values: np.ndarray      # R_l(r_k)
    derivs: np.ndarray      # R_l'(r_k)
    kind: str               # "regular" | "irregular-bessel-matched"

    @property
    def r_b(self) -> float:
        return float(self.mesh[-1])

    def at_boundary(self) -> tuple[complex, complex]:
        return complex(self.values[-1]), complex(self.derivs[-1])


def _numerov_coefficients(pot: RadialPotential, l: int, energy: complex):
    r = pot.mesh
    f = 2.0 * (complex(energy) - pot.values) - l * (l + 1) / r ** 2
    h = r[1] - r[0]
    if np.max(np.abs(np.diff(r) - h)) > 1e-9 * h:
        raise MeshError("Numerov integrator requires a uniform mesh")
    return r, f, h


def _endpoint_derivative(u0, u1, c0, c1, c2, h):
    # u'(x0) from one Taylor step toward x1, with u'' = -f u known exactly
    # at the mesh points; u''' and u'''' come from differencing u''
    uppp = (-3 * c0 + 4 * c1 - c2) / (2 * h)
    upppp = (c2 - 2 * c1 + c0) / (h * h)
    return (u1 - u0 - h * h / 2 * c0 - h ** 3 / 6 * uppp - h ** 4 / 24 * upppp) / h


def _u_to_solution(l, energy, r, u, f, h, kind) -> RadialSolution:
    # u' by central difference with the O(h^2) term cancelled via u'' = -f u,
    # O(h^4)-accurate Taylor formulas at the two ends; then R = u/r
    du = np.empty_like(u)
    du[1:-1] = (u[2:] - u[:-2]) / (2 * h) + (h / 12.0) * (f[2:] * u[2:] - f[:-2] * u[:-2])
    c = -f * u
    du[0] = _endpoint_derivative(u[0], u[1], c[0], c[1], c[2], h)
    du[-1] = -_endpoint_derivative(u[-1], u[-2], c[-1], c[-2], c[-3], h)
    vals = u / r
    ders = du / r - u / r ** 2
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(ders))):
        raise MeshError(f"radial integration diverged (l={l}, E={energy})")
    return RadialSolution(l=l, energy=complex(energy), mesh=r,
                          values=vals, derivs=ders, kind=kind)


def solve_radial_regular(pot: RadialPotential, l: int, energy: complex) -> RadialSolution:
    """Outward Numerov integration of the regular solution.

    Seeded with R ~ r^l at the first two mesh points (small-r leading
    coefficient 1); any overall scale cancels in the Wronskian ratio that
    forms t.
    """
    r, f, h = _numerov_coefficients(pot, l, energy)
    n = r.size
    u = np.empty(n, dtype=complex)
    # r^{l+1} seed with the next series term, u ~ r^{l+1}(1 - (E-V) r^2/(2l+3)),
    # so the two start values are consistent to O(r^4)
    for k in (0, 1):
        u[k] = r[k] ** (l + 1) * (1.0 - (complex(energy) - pot.values[k])
                                  * r[k] ** 2 / (2 * l + 3))
    w = 1.0 + (h * h / 12.0) * f
    for k in range(1, n - 1):
        u[k + 1] = ((12.0 - 10.0 * w[k]) * u[k] - w[k - 1] * u[k - 1]) / w[k + 1]
    return _u_to_solution(l, energy, r, u, f, h, "regular")


def solve_radial_irregular(pot: RadialPotential, l: int, energy: complex) -> RadialSolution:
    """Inward Numerov integration from Bessel boundary values at R_b.

    The solution matches j_l(kappa r) in value and slope at the bounding
    sphere; for V = 0 it reproduces j_l everywhere.
    """
    r, f, h = _numerov_coefficients(pot, l, energy)
    kappa = wavenumber(energy)
    n = r.size
    x = kappa * r[-1]
    j = sph_bessel_j_all(l, x)[l]
    jp = sph_bessel_j_deriv(l, x)
    u_b = r[-1] * j
    up_b = j + r[-1] * kappa * jp
    # fourth-order Taylor step for the second start value; f' and f'' from
    # mesh differences are accurate enough for the O(h^3), O(h^4) terms
    fp = (f[-1] - f[-2]) / h if n >= 2 else 0.0
    fpp = (f[-1] - 2 * f[-2] + f[-3]) / h ** 2 if n >= 3 else 0.0
    upp = -f[-1] * u_b
    uppp = -fp * u_b - f[-1] * up_b
    upppp = -fpp * u_b - 2 * fp * up_b + f[-1] ** 2 * u_b
    u = np.empty(n, dtype=complex)
    u[-1] = u_b
    u[-2] = (u_b - h * up_b + h ** 2 / 2 * upp - h ** 3 / 6 * uppp
             + h ** 4 / 24 * upppp)
    w = 1.0 + (h * h / 12.0) * f
    for k in range(n - 2, 0, -1):
        u[k - 1] = ((12.0 - 10.0 * w[k]) * u[k] - w[k + 1] * u[k + 1]) / w[k - 1]
    return _u_to_solution(l, energy, r, u, f, h, "irregular-bessel-matched")


@dataclass(frozen=True)
class SiteMatrices:
    """Boundary-sphere scattering data of one site.

    e_mat and s_mat are the Wronskians of the regular solutions against
    -i kappa h^+_l and j_l at R_b; t_mat = -s_mat e_mat^{-1}. All three are
    diagonal for spherical potentials.
    """

    l_max: int
    energy: complex
    kappa: complex
    e_mat: np.ndarray
    s_mat: np.ndarray
    t_mat: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.t_mat is None:
            object.__setattr__(self, "t_mat", t_matrix(self))

    @property
    def s_inv(self) -> np.ndarray:
        n = self.s_mat.shape[0]
        cond = np.linalg.cond(self.s_mat)
        if not np.isfinite(cond) or cond > 1e13:
            raise SingularMatrixError("S matrix is singular", context="s_inv",
                                      energy=self.energy, rcond=1.0 / cond if cond else 0.0)
        return np.linalg.solve(self.s_mat, np.eye(n, dtype=complex))


def wronskian_matrices(solutions: list[RadialSolution], kappa: complex) -> SiteMatrices:
    """E and S matrices from boundary Wronskians of the regular solutions.

    W[f, g] = f g' - g f' evaluated at R_b, with f the free reference
    (-i kappa h^+_l for E, j_l for S) and g the radial solution. Spherical
    potentials give one solution per l, hence diagonal matrices.
    """
    l_max = max(s.l for s in solutions)
    by_l = {s.l: s for s in solutions if s.kind == "regular"}
    if sorted(by_l) != list(range(l_max + 1)):
        raise ValueError("need one regular solution for every l <= l_max")
    r_b = solutions[0].r_b
    energy = solutions[0].energy
    x = kappa * r_b
    n = n_angular(l_max)
    e_diag = np.empty(l_max + 1, dtype=complex)
    s_diag = np.empty(l_max + 1, dtype=complex)
    j_all = sph_bessel_j_all(l_max, x)
    h_all = sph_hankel_plus_all(l_max, x)
    for l in range(l_max + 1):
        R, Rp = by_l[l].at_boundary()
        j, h = j_all[l], h_all[l]
        jp = kappa * sph_bessel_j_deriv(l, x)
        hp = kappa * sph_hankel_plus_deriv(l, x)
        s_diag[l] = r_b ** 2 * (j * Rp - R * jp)
        e_diag[l] = r_b ** 2 * (-1j * kappa) * (h * Rp - R * hp)
    expand = np.concatenate([[l] * (2 * l + 1) for l in range(l_max + 1)])
    e_mat = np.diag(e_diag[expand]).astype(complex)
    s_mat = np.diag(s_diag[expand]).astype(complex)
    return SiteMatrices(l_max=l_max, energy=energy, kappa=kappa,
                        e_mat=e_mat, s_mat=s_mat)


def t_matrix(mats: SiteMatrices) -> np.ndarray:
    """Transition operator t = -S E^{-1}."""
    e = mats.e_mat
    cond = np.linalg.cond(e)
    if not np.isfinite(cond) or cond > 1e13:
        raise SingularMatrixError("E matrix is singular", context="t_matrix",
                                  energy=mats.energy,
                                  rcond=1.0 / cond if cond else 0.0)
    return -np.linalg.solve(e.T, mats.s_mat.T).T


def site_matrices(pot: RadialPotential, l_max: int, energy: complex) -> SiteMatrices:
    """Convenience: solve all regular channels and build E, S, t."""
    kappa = wavenumber(energy)
    sols = [solve_radial_regular(pot, l, energy) for l in range(l_max + 1)]
    return wronskian_matrices(sols, kappa)


def synthetic_anisotropic_t(base_diag: np.ndarray, strength: float,
                            decay: float, seed: int) -> np.ndarray:
    """Full-potential-like t: diagonal base plus a symmetric random block.

    The perturbation magnitude follows
    strength * exp(-decay |l - l'|) * sqrt(|t_l t_l'|), which places sizable
    couplings between low and high l, the regime where truncating t fails.
    Deterministic for a fixed seed.
    """
    if strength < 0:
        raise ValueError(f"strength must be >= 0, got {strength}")
    base_diag = np.asarray(base_diag, dtype=complex)
    n = base_diag.size
    l_max = int(round(np.sqrt(n))) - 1
    if n_angular(l_max) != n:
        raise ValueError(f"base diagonal length {n} is not a full (l_max+1)^2 block")
    t = np.diag(base_diag)
    if strength == 0.0:
        return t
    ls = np.concatenate([[l] * (2 * l + 1) for l in range(l_max + 1)])
    env = strength * np.exp(-decay * np.abs(ls[:, None] - ls[None, :]))
    env = env * np.sqrt(np.abs(base_diag[:, None] * base_diag[None, :]))
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    xi /= np.sqrt(2.0)
    delta = np.triu(xi) + np.triu(xi, 1).T      # symmetric, entries ~ CN(0,1)
    return t + env * delta


# ---------------------------------------------------------------------------
# potential file round-trip
# ---------------------------------------------------------------------------

def save_potential(pot: RadialPotential, path):
    lines = [f"npts {pot.mesh.size} rb {pot.r_b!r} unit hartree-bohr"]
    for r, v in zip(pot.mesh, pot.values):
        lines.append(f"{r!r} {v.real!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_potential(path) -> RadialPotential:
    from .errors import ClusterFormatError
    with open(path) as fh:
        raw = [ln.strip() for ln in fh.readlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(raw) if ln and not ln.startswith("#")]
    if not lines:
        raise ClusterFormatError("empty potential file")
    ln_no, header = lines[0]
    toks = header.split()
    if len(toks) != 6 or toks[0] != "npts" or toks[2] != "rb" or toks[4] != "unit":
        raise ClusterFormatError(
            f"expected 'npts <n> rb <R_b> unit hartree-bohr', got {header!r}", line=ln_no)
    if toks[5] != "hartree-bohr":
        raise ClusterFormatError(f"unsupported unit {toks[5]!r}", line=ln_no)
    npts, r_b = int(toks[1]), float(toks[3])
    if len(lines) - 1 != npts:
        raise ClusterFormatError(
            f"header declares {npts} points, found {len(lines) - 1}", line=ln_no)
    mesh = np.empty(npts)
    vals = np.empty(npts)
    for k, (ln_no, ln) in enumerate(lines[1:]):
        toks = ln.split()
        if len(toks) != 2:
            raise ClusterFormatError(f"expected 'r V' pair, got {ln!r}", line=ln_no)
        mesh[k], vals[k] = float(toks[0]), float(toks[1])
    if abs(mesh[-1] - r_b) > 1e-9 * max(1.0, r_b):
        raise ClusterFormatError(f"last mesh point {mesh[-1]} != declared R_b {r_b}")
    return RadialPotential(mesh, vals.astype(complex))
