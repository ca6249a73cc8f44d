"""Angular-momentum bookkeeping and special functions.

Real spherical harmonics, Gaunt coefficients and spherical Bessel/Hankel
functions of complex argument. Everything here is pure and reentrant; the
Gaunt cache is populated on first use and only grows.

Conventions
-----------
Real harmonics are Condon-Shortley-free: for m > 0 the harmonic carries
``cos(m phi)``, for m < 0 ``sin(|m| phi)``, and the associated Legendre
functions are taken without the (-1)^m phase. The composite index of (l, m)
within one site block is ``l*l + l + m``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RangeError

__all__ = [
    "AngularIndex",
    "enumerate_angular",
    "angular_offset",
    "composite_index",
    "composite_to_site_angular",
    "n_angular",
    "sph_bessel_j",
    "sph_bessel_j_all",
    "sph_bessel_j_deriv",
    "sph_hankel_plus",
    "sph_hankel_plus_all",
    "sph_hankel_plus_deriv",
    "real_sph_harm",
    "real_sph_harm_all",
    "gaunt",
    "gaunt_expansion",
    "wavenumber",
]

# e^{|Im z|} overflows IEEE double a little above 709; keep a safety margin.
_IM_OVERFLOW = 650.0


# ---------------------------------------------------------------------------
# index bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AngularIndex:
    """Orbital/magnetic quantum number pair (l, m) with -l <= m <= l."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 0:
            raise DomainError(f"l must be >= 0, got {self.l}")
        if abs(self.m) > self.l:
            raise DomainError(f"|m| must be <= l, got (l={self.l}, m={self.m})")

    @property
    def offset(self) -> int:
        """Flattened position within a site block: l^2 + l + m."""
        return self.l * self.l + self.l + self.m


def n_angular(l_max: int) -> int:
    """Number of (l, m) channels with l <= l_max."""
    return (l_max + 1) ** 2


def enumerate_angular(l_max: int) -> list[AngularIndex]:
    """All angular indices with l <= l_max, ordered by flattened offset."""
    return [AngularIndex(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]


def angular_offset(L: AngularIndex) -> int:
    return L.offset


def composite_index(site: int, L: AngularIndex, l_max: int) -> int:
    """Position of (site, L) in the unpartitioned global basis."""
    if site < 0:
        raise DomainError(f"site must be >= 0, got {site}")
    if L.l > l_max:
        raise DomainError(f"l = {L.l} exceeds l_max = {l_max}")
    return site * n_angular(l_max) + L.offset


def composite_to_site_angular(index: int, l_max: int) -> tuple[int, AngularIndex]:
    """Inverse of :func:`composite_index`."""
    n = n_angular(l_max)
    site, offset = divmod(index, n)
    l = math.isqrt(offset)
    m = offset - l * l - l
    return site, AngularIndex(l, m)


def wavenumber(energy: complex) -> complex:
    """Momentum kappa = sqrt(2 E) on the sheet with Im(kappa) >= 0.

    Hartree atomic units; the branch choice keeps outgoing waves decaying
    for Im E > 0.
    """
    kappa = cmath.sqrt(2.0 * complex(energy))
    if kappa.imag < 0.0:
        kappa = -kappa
    return kappa


# ---------------------------------------------------------------------------
# spherical Bessel / Hankel functions of complex argument
# ---------------------------------------------------------------------------

def _check_im(z: complex):
    if abs(z.imag) > _IM_OVERFLOW:
        raise RangeError(f"spherical function overflow: |Im z| = {abs(z.imag):.1f}")


def _bessel_j_series(l: int, z: complex) -> complex:
    # z^l / (2l+1)!! * sum_k (-z^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))
    term = 1.0 + 0.0j
    total = term
    z2 = -0.5 * z * z
    for k in range(1, 200):
        term *= z2 / (k * (2 * l + 2 * k + 1))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    lead = 1.0 + 0.0j
    for n in range(1, l + 1):
        lead *= z / (2 * n + 1)
    return lead * total


def sph_bessel_j_all(l_max: int, z: complex) -> np.ndarray:
    """j_l(z) for l = 0 .. l_max, complex argument.

    Series for small |z|, Miller downward recurrence otherwise; the
    recurrence direction keeps the regular solution stable for l >~ |z|.
    """
    z = complex(z)
    _check_im(z)
    out = np.empty(l_max + 1, dtype=complex)
    az = abs(z)
    if az <= max(2.0, 0.6 * l_max):
        for l in range(l_max + 1):
            out[l] = _bessel_j_series(l, z)
        return out
    # Miller: downward from a padded start order, then normalize with j_0.
    # The start must sit above both l_max and |z| so the seed lies in the
    # regime where the regular solution is minimal.
    n_start = max(l_max, int(az)) + 15 + int(2.0 * az ** 0.5)
    fp = 0.0 + 0.0j
    fc = 1e-280 + 0.0j
    vals = np.empty(n_start + 1, dtype=complex)
    vals[n_start] = fc
    for n in range(n_start, 0, -1):
        fm = (2 * n + 1) / z * fc - fp
        fp, fc = fc, fm
        vals[n - 1] = fc
        if abs(fc) > 1e250:
            vals[n - 1:] /= 1e250
            fp /= 1e250
            fc = vals[n - 1]
    j0 = cmath.sin(z) / z
    j1 = cmath.sin(z) / (z * z) - cmath.cos(z) / z
    # normalize against whichever reference is better conditioned
    if abs(vals[0]) >= abs(vals[1]):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    out[:] = vals[: l_max + 1] * scale
    return out


def sph_bessel_j(l: int, z: complex) -> complex:
    """Spherical Bessel function of the first kind, complex argument."""
    if l < 0:
        raise DomainError(f"l must be >= 0, got {l}")
    z = complex(z)
    if z == 0:
        return 1.0 + 0.0j if l == 0 else 0.0 + 0.0j
    return complex(sph_bessel_j_all(l, z)[l])


def sph_bessel_j_deriv(l: int, z: complex) -> complex:
    """d/dz j_l(z)."""
    if l == 0:
        return -sph_bessel_j(1, z)
    j = sph_bessel_j_all(l, z)
    return j[l - 1] - (l + 1) / z * j[l]


def sph_hankel_plus_all(l_max: int, z: complex) -> np.ndarray:
    """h^+_l(z) = j_l(z) + i y_l(z) for l = 0 .. l_max.

    Upward recurrence from the closed forms for l = 0, 1; stable because
    the outgoing solution grows with l.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("h^+_l is singular at z = 0")
    if z.imag < -_IM_OVERFLOW:  # e^{iz} overflows for Im z << 0
        raise RangeError(f"h^+ overflow: Im z = {z.imag:.1f}")
    out = np.empty(max(l_max + 1, 2), dtype=complex)
    eiz = cmath.exp(1j * z)
    out[0] = -1j * eiz / z
    out[1] = -(eiz / z) * (1.0 + 1j / z)
    for l in range(1, l_max):
        out[l + 1] = (2 * l + 1) / z * out[l] - out[l - 1]
    return out[: l_max + 1]


def sph_hankel_plus(l: int, z: complex) -> complex:
    """Outgoing spherical Hankel function h^+_l(z)."""
    if l < 0:
        raise DomainError(f"l must be >= 0, got {l}")
    return complex(sph_hankel_plus_all(l, z)[l])


def sph_hankel_plus_deriv(l: int, z: complex) -> complex:
    """d/dz h^+_l(z)."""
    if l == 0:
        return -sph_hankel_plus(1, z)
    h = sph_hankel_plus_all(l, z)
    return h[l - 1] - (l + 1) / z * h[l]


# ---------------------------------------------------------------------------
# real spherical harmonics
# ---------------------------------------------------------------------------

def _legendre_poly_table(l_max: int, x: np.ndarray) -> np.ndarray:
    """P~_l^m(x) = P_l^m(x) / (1-x^2)^{m/2} without Condon-Shortley phase.

    Returns array of shape (l_max+1, l_max+1, len(x)); entries with m > l
    are zero. The division by (1-x^2)^{m/2} makes every entry a polynomial
    in x, which keeps the pole direction exact.
    """
    x = np.asarray(x, dtype=float)
    p = np.zeros((l_max + 1, l_max + 1) + x.shape)
    p[0, 0] = 1.0
    for m in range(1, l_max + 1):
        p[m, m] = (2 * m - 1) * p[m - 1, m - 1]
    for m in range(l_max):
        p[m + 1, m] = (2 * m + 1) * x * p[m, m]
    for m in range(l_max + 1):
        for l in range(m + 2, l_max + 1):
            p[l, m] = ((2 * l - 1) * x * p[l - 1, m] - (l + m - 1) * p[l - 2, m]) / (l - m)
    return p


def _norm_lm(l: int, m: int) -> float:
    return math.sqrt((2 * l + 1) / (4 * math.pi)
                     * math.factorial(l - m) / math.factorial(l + m))


def real_sph_harm_all(l_max: int, u: np.ndarray) -> np.ndarray:
    """All real spherical harmonics l <= l_max at unit vectors ``u``.

    Parameters
    ----------
    u : array (..., 3)
        Unit direction vectors.

    Returns
    -------
    array ((l_max+1)^2, ...) in flattened-offset order.
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    u = np.atleast_2d(u)
    x, y, zc = u[..., 0], u[..., 1], u[..., 2]
    ptab = _legendre_poly_table(l_max, zc)
    # (x + i y)^m carries rho^m cos(m phi) and rho^m sin(m phi)
    xy = x + 1j * y
    powers = np.empty((l_max + 1,) + xy.shape, dtype=complex)
    powers[0] = 1.0
    for m in range(1, l_max + 1):
        powers[m] = powers[m - 1] * xy
    out = np.empty((n_angular(l_max),) + xy.shape)
    for l in range(l_max + 1):
        base = l * l + l
        out[base] = _norm_lm(l, 0) * ptab[l, 0]
        for m in range(1, l + 1):
            c = math.sqrt(2.0) * _norm_lm(l, m) * ptab[l, m]
            out[base + m] = c * powers[m].real
            out[base - m] = c * powers[m].imag
    return out[:, 0] if scalar else out


def real_sph_harm(L: AngularIndex, u) -> float:
    """Real spherical harmonic Y_L at the unit vector ``u``."""
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if abs(norm - 1.0) > 1e-12:
        raise DomainError(f"direction vector must be unit length, |u| = {norm!r}")
    return float(real_sph_harm_all(L.l, u)[L.offset])


# ---------------------------------------------------------------------------
# Gaunt coefficients
# ---------------------------------------------------------------------------

_gaunt_cache: dict[tuple[int, int, int, int, int, int], float] = {}


def _phi_triple(m1: int, m2: int, m3: int) -> float:
    """Exact integral over phi of the three azimuthal factors.

    Factor A_m is cos(m phi) for m > 0, 1 for m = 0, sin(|m| phi) for m < 0.
    Uniform trapezoid on [0, 2pi) with more points than the highest harmonic
    integrates the trigonometric polynomial exactly.
    """
    npts = 2 * (abs(m1) + abs(m2) + abs(m3)) + 4
    phi = np.arange(npts) * (2.0 * math.pi / npts)
    prod = np.ones(npts)
    for m in (m1, m2, m3):
        if m > 0:
            prod = prod * np.cos(m * phi)
        elif m < 0:
            prod = prod * np.sin(-m * phi)
    return float(prod.sum() * (2.0 * math.pi / npts))


def gaunt(L1: AngularIndex, L2: AngularIndex, L3: AngularIndex) -> float:
    """Gaunt coefficient of three real spherical harmonics.

    Integral over the unit sphere of Y_{L1} Y_{L2} Y_{L3}. Evaluated by a
    product quadrature that is exact for the polynomial integrand
    (Gauss-Legendre in cos(theta), trapezoid in phi), so the result is
    closed-form up to roundoff. Values are cached.
    """
    l1, m1, l2, m2, l3, m3 = L1.l, L1.m, L2.l, L2.m, L3.l, L3.m
    key = (l1, m1, l2, m2, l3, m3)
    hit = _gaunt_cache.get(key)
    if hit is not None:
        return hit
    val = 0.0
    lsum = l1 + l2 + l3
    triangle = abs(l1 - l2) <= l3 <= l1 + l2
    if lsum % 2 == 0 and triangle:
        fphi = _phi_triple(m1, m2, m3)
        if abs(fphi) > 1e-14:
            nth = lsum // 2 + 2
            x, w = np.polynomial.legendre.leggauss(nth)
            ptab = _legendre_poly_table(max(l1, l2, l3), x)
            am1, am2, am3 = abs(m1), abs(m2), abs(m3)
            integrand = (ptab[l1, am1] * ptab[l2, am2] * ptab[l3, am3]
                         * (1.0 - x * x) ** ((am1 + am2 + am3) // 2))
            ftheta = float(np.dot(w, integrand))
            norm = _norm_lm(l1, am1) * _norm_lm(l2, am2) * _norm_lm(l3, am3)
            for m in (m1, m2, m3):
                if m != 0:
                    norm *= math.sqrt(2.0)
            val = norm * ftheta * fphi
    # permutation symmetry for free
    for key in ((l1, m1, l2, m2, l3, m3), (l2, m2, l1, m1, l3, m3),
                (l3, m3, l1, m1, l2, m2), (l1, m1, l3, m3, l2, m2),
                (l2, m2, l3, m3, l1, m1), (l3, m3, l2, m2, l1, m1)):
        _gaunt_cache[key] = val
    return val


def gaunt_expansion(L1: AngularIndex, L2: AngularIndex) -> list[tuple[AngularIndex, float]]:
    """Nonzero Gaunt terms coupling Y_{L1} Y_{L2} to a third harmonic.

    Only l3 in |l1-l2| .. l1+l2 with even l1+l2+l3 and |m3| in
    {|m1-m2|, m1+m2} can contribute; everything else is skipped outright.
    """
    out = []
    m_cands = {abs(L1.m - L2.m), abs(L1.m + L2.m)}
    for l3 in range(abs(L1.l - L2.l), L1.l + L2.l + 1, 2):
        for am3 in m_cands:
            if am3 > l3:
                continue
            for m3 in ({0} if am3 == 0 else {am3, -am3}):
                c = gaunt(L1, L2, AngularIndex(l3, m3))
                if abs(c) > 1e-14:
                    out.append((AngularIndex(l3, m3), c))
    return out
