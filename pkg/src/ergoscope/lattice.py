"""Hypercubic lattice geometry, boundary-aware distances, and block partitions.

Site enumeration is row-major over 1-based coordinates: for D = 2, L = 3 the
site order is (1,1), (1,2), (1,3), (2,1), ...  This is fixed so state-vector
digit layouts are reproducible across the package.
"""

import itertools
import math
from dataclasses import dataclass

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class Lattice:
    """D-dimensional hypercubic site set {1..L}^D with a boundary mode."""

    D: int
    L: int
    boundary: str

    @property
    def V(self) -> int:
        return self.L**self.D

    def sites(self) -> range:
        return range(1, self.V + 1)

    def coords(self, site: int) -> tuple:
        """1-based coordinate vector of a site index."""
        self._check_site(site)
        rem = site - 1
        out = []
        for k in range(self.D):
            power = self.L ** (self.D - 1 - k)
            out.append(rem // power + 1)
            rem %= power
        return tuple(out)

    def site_at(self, coords) -> int:
        if len(coords) != self.D or not all(1 <= c <= self.L for c in coords):
            raise ValueError(f"invalid coordinates {coords} for L={self.L}, D={self.D}")
        idx = 0
        for c in coords:
            idx = idx * self.L + (c - 1)
        return idx + 1

    def _check_site(self, site: int) -> None:
        if not (isinstance(site, (int,)) and 1 <= site <= self.V):
            raise ValueError(f"site {site} outside 1..{self.V}")


def build_lattice(D: int, L: int, boundary: str = "periodic") -> Lattice:
    if D < 1:
        raise ValueError(f"dimension must be >= 1, got {D}")
    if L < 2:
        raise ValueError(f"linear size must be >= 2, got {L}")
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    return Lattice(D=D, L=L, boundary=boundary)


def distance(lattice: Lattice, i: int, j: int) -> float:
    """Euclidean distance subject to the boundary conditions."""
    ci = lattice.coords(i)
    cj = lattice.coords(j)
    total = 0.0
    for a, b in zip(ci, cj):
        delta = abs(a - b)
        if lattice.boundary == "periodic":
            delta = min(delta, lattice.L - delta)
        total += float(delta) ** 2
    return math.sqrt(total)


@dataclass(frozen=True)
class Partition:
    """Disjoint hypercube blocks of side l, plus any uncovered remainder."""

    lattice: Lattice
    block_size: int
    blocks: tuple
    remainder: tuple
    mode: str

    def block_of(self) -> dict:
        """site -> block index map; remainder sites map to -1."""
        owner = {s: -1 for s in self.lattice.sites()}
        for b, block in enumerate(self.blocks):
            for s in block:
                owner[s] = b
        return owner


def partition_hypercubes(lattice: Lattice, l: int, mode: str = "strict") -> Partition:
    """Tile the lattice with side-l hypercubes anchored at the origin corner.

    strict mode demands l | L (exact cover); lenient mode tiles floor(L/l)
    blocks per axis and reports the uncovered remainder.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    if not 1 <= l <= lattice.L:
        raise ValueError(f"block size {l} outside 1..{lattice.L}")
    if mode == "strict" and lattice.L % l != 0:
        raise ValueError(f"strict partition needs l | L, got l={l}, L={lattice.L}")
    per_axis = lattice.L // l
    blocks = []
    for anchor in itertools.product(range(per_axis), repeat=lattice.D):
        sites = []
        for offset in itertools.product(range(1, l + 1), repeat=lattice.D):
            coords = tuple(a * l + o for a, o in zip(anchor, offset))
            sites.append(lattice.site_at(coords))
        blocks.append(tuple(sorted(sites)))
    covered = set().union(*blocks)
    remainder = tuple(s for s in lattice.sites() if s not in covered)
    return Partition(lattice=lattice, block_size=l, blocks=tuple(blocks),
                     remainder=remainder, mode=mode)


def cut_pairs(partition: Partition) -> list:
    """All unordered site pairs not contained in a single block.

    These are exactly the pair supports of the residual interaction
    H - sum_A H_A; pairs touching remainder sites count as cut.
    """
    owner = partition.block_of()
    lattice = partition.lattice
    out = []
    for i in lattice.sites():
        bi = owner[i]
        for j in range(i + 1, lattice.V + 1):
            if not (bi >= 0 and owner[j] == bi):
                out.append((i, j))
    return out


def nn_bonds(lattice: Lattice) -> list:
    """Nearest-neighbor bonds along each axis, one entry per geometric bond.

    For a periodic axis of length 2 the same unordered pair appears twice
    (the two arcs of the ring); callers accumulate terms per pair.
    """
    bonds = []
    for site in lattice.sites():
        coords = lattice.coords(site)
        for axis in range(lattice.D):
            c = coords[axis]
            if c < lattice.L:
                nxt = c + 1
            elif lattice.boundary == "periodic":
                nxt = 1
            else:
                continue
            other = lattice.site_at(coords[:axis] + (nxt,) + coords[axis + 1:])
            bonds.append((site, other))
    return bonds
