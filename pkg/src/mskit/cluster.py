"""Cluster geometry: site lists, lattice generators, file round-trip.

Lengths are Bohr internally; the cluster file format carries an explicit
unit tag and converts on read/write. Empty cells are ordinary sites whose
species carries a flat potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClusterFormatError, DomainError

BOHR_PER_ANGSTROM = 1.8897259886
HARTREE_PER_EV = 1.0 / 27.211386245988

MIN_SITE_SEPARATION = 1e-6  # Bohr

__all__ = [
    "Site",
    "Species",
    "Cluster",
    "build_fcc",
    "build_diamond",
    "build_honeycomb",
    "build_shells",
    "load_cluster",
    "save_cluster",
    "BOHR_PER_ANGSTROM",
    "HARTREE_PER_EV",
]


@dataclass(frozen=True)
class Site:
    """One scattering site: position (Bohr), species id, empty-cell flag."""

    position: tuple[float, float, float]
    species_id: int = 0
    is_empty_cell: bool = False


@dataclass(frozen=True)
class Species:
    """Per-species partition momentum and bounding-sphere radius (Bohr)."""

    l_pt: int
    r_b: float

    def __post_init__(self):
        if self.l_pt < 0:
            raise DomainError(f"l_pt must be >= 0, got {self.l_pt}")
        if self.r_b <= 0:
            raise DomainError(f"bounding radius must be > 0, got {self.r_b}")


@dataclass(frozen=True)
class Cluster:
    """Immutable ordered collection of sites plus the species table."""

    sites: tuple[Site, ...]
    species: dict[int, Species] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sites:
            raise DomainError("cluster has no sites")
        pos = self.positions
        for i in range(len(pos)):
            d = np.linalg.norm(pos[i + 1:] - pos[i], axis=1)
            if d.size and d.min() <= MIN_SITE_SEPARATION:
                j = i + 1 + int(np.argmin(d))
                raise DomainError(
                    f"sites {i} and {j} coincide (separation {d.min():.2e} Bohr)")
        for s in self.sites:
            if s.species_id not in self.species:
                raise DomainError(f"site species {s.species_id} missing from table")

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sites], dtype=float)

    def l_pt_of_site(self, i: int) -> int:
        return self.species[self.sites[i].species_id].l_pt

    def with_species(self, species: dict[int, Species]) -> "Cluster":
        return Cluster(self.sites, dict(species))


def _default_species(l_pt=2, r_b=2.0):
    return {0: Species(l_pt=l_pt, r_b=r_b)}


def build_fcc(lattice_a: float, cluster_radius: float,
              species: dict[int, Species] | None = None) -> Cluster:
    """All fcc lattice points within ``cluster_radius`` of the origin.

    Parameters are in Bohr. The origin site is always included; the
    boundary is inclusive up to a 1e-9 relative tolerance so that shells
    lying exactly at the radius are kept.
    """
    if lattice_a <= 0:
        raise DomainError(f"lattice constant must be > 0, got {lattice_a}")
    if cluster_radius < 0:
        raise DomainError(f"cluster radius must be >= 0, got {cluster_radius}")
    prim = 0.5 * lattice_a * np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    nmax = int(math.ceil(2.0 * cluster_radius / lattice_a)) + 1
    rng = range(-nmax, nmax + 1)
    pts = []
    cut = cluster_radius * (1.0 + 1e-9)
    for n1 in rng:
        for n2 in rng:
            for n3 in rng:
                p = n1 * prim[0] + n2 * prim[1] + n3 * prim[2]
                if np.dot(p, p) <= cut * cut:
                    pts.append(p)
    pts.sort(key=lambda p: (round(np.dot(p, p), 9), p[0], p[1], p[2]))
    sites = tuple(Site(position=tuple(p)) for p in pts)
    return Cluster(sites, species or _default_species())


def build_diamond(lattice_a: float, cluster_radius: float,
                  species: dict[int, Species] | None = None) -> Cluster:
    """Diamond-lattice points (fcc + 2-atom basis) within a radius."""
    fcc = build_fcc(lattice_a, cluster_radius + 0.5 * lattice_a)
    shift = 0.25 * lattice_a * np.array([1.0, 1.0, 1.0])
    pts = []
    cut = cluster_radius * (1.0 + 1e-9)
    for p in fcc.positions:
        for q in (p, p + shift):
            if np.dot(q, q) <= cut * cut:
                pts.append(q)
    pts.sort(key=lambda p: (round(np.dot(p, p), 9), p[0], p[1], p[2]))
    sites = tuple(Site(position=tuple(p)) for p in pts)
    return Cluster(sites, species or _default_species())


def build_honeycomb(bond: float, n_rings: int = 1,
                    atom_species: int = 0, ec_species: int = 1,
                    species: dict[int, Species] | None = None,
                    add_empty_cells: bool = True) -> Cluster:
    """Flat honeycomb patch centered on a hexagon hole, with empty cells.

    Atom shells around the central hole sit at radius ``bond`` (6 vertices,
    angles 0, 60, ...) and, for ``n_rings >= 2``, at ``2*bond`` (the radial
    continuation of each vertex). Hole-center empty cells sit at the origin
    and, for ``n_rings >= 2``, at the six neighboring hole centers at
    sqrt(3)*bond (angles 30, 90, ...).
    """
    if bond <= 0:
        raise DomainError(f"bond length must be > 0, got {bond}")
    if n_rings < 1:
        raise DomainError(f"n_rings must be >= 1, got {n_rings}")

    def ring(radius, phase_deg, n=6):
        for k in range(n):
            ang = math.radians(phase_deg + 60.0 * k)
            yield (radius * math.cos(ang), radius * math.sin(ang), 0.0)

    pts = list(ring(bond, 0.0))
    if n_rings >= 2:
        pts += list(ring(2.0 * bond, 0.0))
    sites = [Site(position=p, species_id=atom_species) for p in pts]
    if add_empty_cells:
        sites.append(Site(position=(0.0, 0.0, 0.0), species_id=ec_species,
                          is_empty_cell=True))
        if n_rings >= 2:
            sites.extend(Site(position=p, species_id=ec_species, is_empty_cell=True)
                         for p in ring(math.sqrt(3.0) * bond, 30.0))
    if species is None:
        species = {atom_species: Species(l_pt=3, r_b=0.5 * bond),
                   ec_species: Species(l_pt=2, r_b=0.5 * bond)}
    return Cluster(tuple(sites), species)


def build_shells(positions, species_ids=None, empty_flags=None,
                 species: dict[int, Species] | None = None) -> Cluster:
    """Cluster from an explicit list of positions (Bohr)."""
    positions = [tuple(float(x) for x in p) for p in positions]
    n = len(positions)
    if species_ids is None:
        species_ids = [0] * n
    if empty_flags is None:
        empty_flags = [False] * n
    sites = tuple(Site(position=p, species_id=int(s), is_empty_cell=bool(e))
                  for p, s, e in zip(positions, species_ids, empty_flags))
    if species is None:
        species = _default_species()
        for sid in set(species_ids):
            species.setdefault(int(sid), Species(l_pt=2, r_b=2.0))
    return Cluster(sites, species)


def fcc_first_shell(nn_distance: float,
                    species: dict[int, Species] | None = None) -> Cluster:
    """Origin plus the 12 fcc nearest neighbors at ``nn_distance``."""
    h = nn_distance / math.sqrt(2.0)
    pts = [(0.0, 0.0, 0.0)]
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for si in (h, -h):
            for sj in (h, -h):
                p = [0.0, 0.0, 0.0]
                p[i], p[j] = si, sj
                pts.append(tuple(p))
    return build_shells(pts, species=species)


# ---------------------------------------------------------------------------
# file round-trip
# ---------------------------------------------------------------------------

def save_cluster(cluster: Cluster, path):
    """Write the line-oriented cluster file (always in Bohr)."""
    lines = [f"nsites {cluster.n_sites} unit bohr"]
    for s in cluster.sites:
        x, y, z = s.position
        lines.append(f"{x!r} {y!r} {z!r} {s.species_id} {int(s.is_empty_cell)}")
    for sid in sorted(cluster.species):
        sp = cluster.species[sid]
        lines.append(f"species {sid} lpt {sp.l_pt} rb {sp.r_b!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_cluster(path) -> Cluster:
    """Parse a cluster file; raises ClusterFormatError with line numbers."""
    with open(path) as fh:
        raw = fh.readlines()
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(raw)
             if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ClusterFormatError("no sites: file is empty")
    ln_no, header = lines[0]
    toks = header.split()
    if len(toks) != 4 or toks[0] != "nsites" or toks[2] != "unit":
        raise ClusterFormatError(f"expected 'nsites <N> unit <bohr|angstrom>', got {header!r}",
                                 line=ln_no)
    try:
        nsites = int(toks[1])
    except ValueError:
        raise ClusterFormatError(f"bad site count {toks[1]!r}", line=ln_no) from None
    if toks[3] not in ("bohr", "angstrom"):
        raise ClusterFormatError(f"unknown unit {toks[3]!r}", line=ln_no)
    scale = 1.0 if toks[3] == "bohr" else BOHR_PER_ANGSTROM
    if nsites <= 0:
        raise ClusterFormatError("no sites: header declares zero sites", line=ln_no)
    if len(lines) < 1 + nsites:
        raise ClusterFormatError(f"header declares {nsites} sites but only "
                                 f"{len(lines) - 1} data lines follow", line=ln_no)
    sites = []
    for ln_no, ln in lines[1:1 + nsites]:
        toks = ln.split()
        if len(toks) != 5:
            raise ClusterFormatError(
                f"expected 'x y z species_id is_empty', got {len(toks)} fields", line=ln_no)
        try:
            xyz = tuple(scale * float(t) for t in toks[:3])
            sid = int(toks[3])
            emp = int(toks[4])
        except ValueError as exc:
            raise ClusterFormatError(str(exc), line=ln_no) from None
        if emp not in (0, 1):
            raise ClusterFormatError(f"is_empty must be 0 or 1, got {toks[4]}", line=ln_no)
        sites.append(Site(position=xyz, species_id=sid, is_empty_cell=bool(emp)))
    species = {}
    for ln_no, ln in lines[1 + nsites:]:
        toks = ln.split()
        if len(toks) != 6 or toks[0] != "species" or toks[2] != "lpt" or toks[4] != "rb":
            raise ClusterFormatError(
                f"expected 'species <id> lpt <int> rb <float>', got {ln!r}", line=ln_no)
        try:
            species[int(toks[1])] = Species(l_pt=int(toks[3]), r_b=scale * float(toks[5]))
        except ValueError as exc:
            raise ClusterFormatError(str(exc), line=ln_no) from None
    if not species:
        species = _default_species()
    try:
        return Cluster(tuple(sites), species)
    except DomainError as exc:
        raise ClusterFormatError(str(exc)) from None
