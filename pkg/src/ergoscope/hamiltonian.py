"""Model specification, short-range admissibility, and dense operator assembly.

Pair-term convention: the map stores ONE matrix per unordered pair {i, j},
equal to the ordered sum U_ij + U_ji of the usual two-body convention.  All
norms, decay checks, and residual bounds below act on that stored matrix;
halve it when comparing against formulas written for ordered sums.

Matrix digit convention matches tensor.py: for a pair {i < j} the stored
d^2 x d^2 matrix has site i as the least significant digit, i.e.
two_site(a, b) == kron(b, a) places `a` on the lower-numbered site.
"""

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import budget
from .lattice import Lattice, Partition, distance, nn_bonds
from .tensor import embed_operator, hermitian_norm, real_if_close

HERMITICITY_RTOL = 1e-12

# spin-1/2 matrices in the package basis: |0> is the s^z = +1 state
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def two_site(op_low: np.ndarray, op_high: np.ndarray) -> np.ndarray:
    """Two-site matrix with op_low acting on the lower-numbered site."""
    return np.kron(op_high, op_low)


def _hermitize(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    scale = np.linalg.norm(mat)
    gap = np.linalg.norm(mat - mat.conj().T)
    if scale > 0 and gap > HERMITICITY_RTOL * scale:
        raise ValueError(f"{what} is not Hermitian: ||M - M^dag|| = {gap:.3e}")
    if gap > 0:
        # float-noise-level gaps are symmetrized silently
        if gap > 1e-14 * scale:
            warnings.warn(f"{what} symmetrized (within tolerance, gap {gap:.3e})")
        mat = (mat + mat.conj().T) / 2
    return real_if_close(mat)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """On-site and unordered-pair terms with short-range decay parameters."""

    d: int
    onsite: dict
    pairs: dict
    u0: float
    delta: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"local dimension must be >= 2, got {self.d}")
        if self.delta <= 0:
            raise ValueError(f"decay exponent delta must be > 0, got {self.delta}")
        onsite = {}
        for site, mat in self.onsite.items():
            mat = _hermitize(mat, f"onsite term at site {site}")
            if mat.shape != (self.d, self.d):
                raise ValueError(f"onsite term at {site} has shape {mat.shape}")
            onsite[int(site)] = mat
        pairs = {}
        for key, mat in self.pairs.items():
            i, j = key
            if i == j:
                raise ValueError(f"pair term on identical sites {key}")
            i, j = (i, j) if i < j else (j, i)
            mat = _hermitize(mat, f"pair term {key}")
            if mat.shape != (self.d**2, self.d**2):
                raise ValueError(f"pair term {key} has shape {mat.shape}")
            pairs[(int(i), int(j))] = mat
        object.__setattr__(self, "onsite", onsite)
        object.__setattr__(self, "pairs", pairs)

    def term_norms(self) -> dict:
        """Operator norm of every stored term, keyed like the term maps."""
        out = {site: hermitian_norm(m) for site, m in self.onsite.items()}
        out.update({key: hermitian_norm(m) for key, m in self.pairs.items()})
        return out

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"d={self.d};u0={self.u0!r};delta={self.delta!r};".encode())
        for site in sorted(self.onsite):
            h.update(f"h{site}:".encode())
            h.update(np.ascontiguousarray(self.onsite[site], dtype=complex).tobytes())
        for key in sorted(self.pairs):
            h.update(f"U{key}:".encode())
            h.update(np.ascontiguousarray(self.pairs[key], dtype=complex).tobytes())
        return h.hexdigest()


@dataclass(eq=False)
class HamiltonianOperator:
    """Dense Hermitian operator on a sorted site support."""

    support: tuple
    matrix: np.ndarray
    d: int = 2
    _norm: float = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.support = tuple(sorted(self.support))
        dim = self.d ** len(self.support)
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} != ({dim}, {dim}) "
                f"for support {self.support}"
            )
        self.matrix = _hermitize(self.matrix, "Hamiltonian matrix")

    @property
    def dim(self) -> int:
        return self.d ** len(self.support)

    @property
    def norm(self) -> float:
        if self._norm is None:
            self._norm = hermitian_norm(self.matrix)
        return self._norm


@dataclass(frozen=True)
class DecayReport:
    admissible: bool
    minimal_u0: float
    u0: float
    delta: float
    worst_term: object


def verify_short_range(spec: ModelSpec, lattice: Lattice) -> DecayReport:
    """Check every stored norm against u0 (1 + r)^-(D + delta).

    Also reports the minimal u0 that would make the model admissible at the
    given delta (on-site terms count with r = 0).
    """
    minimal = 0.0
    worst = None
    for site, mat in spec.onsite.items():
        nrm = hermitian_norm(mat)
        if nrm > minimal:
            minimal, worst = nrm, site
    exponent = lattice.D + spec.delta
    for (i, j), mat in spec.pairs.items():
        need = hermitian_norm(mat) * (1.0 + distance(lattice, i, j)) ** exponent
        if need > minimal:
            minimal, worst = need, (i, j)
    admissible = minimal <= spec.u0 * (1 + 1e-12)
    return DecayReport(admissible=admissible, minimal_u0=minimal,
                       u0=spec.u0, delta=spec.delta, worst_term=worst)


def _sum_terms(terms, support, d: int) -> np.ndarray:
    dim = d ** len(support)
    complex_any = any(np.iscomplexobj(m) for _, m in terms)
    out = np.zeros((dim, dim), dtype=complex if complex_any else float)
    for term_support, mat in terms:
        out += embed_operator(mat, term_support, support, d)
    return out


def assemble_full(spec: ModelSpec, lattice: Lattice) -> HamiltonianOperator:
    """Dense Hamiltonian on the whole lattice."""
    support = tuple(lattice.sites())
    budget.check_matrix(spec.d ** lattice.V, "full Hamiltonian")
    terms = [((site,), mat) for site, mat in spec.onsite.items()]
    terms += [(key, mat) for key, mat in spec.pairs.items()]
    return HamiltonianOperator(support=support, d=spec.d,
                               matrix=_sum_terms(terms, support, spec.d))


def assemble_block(spec: ModelSpec, partition: Partition, block) -> HamiltonianOperator:
    """Block Hamiltonian: only terms fully supported inside the block."""
    block = tuple(sorted(block))
    if block not in partition.blocks:
        raise ValueError(f"block {block} is not part of the partition")
    budget.check_matrix(spec.d ** len(block), "block Hamiltonian")
    inside = set(block)
    terms = [((s,), m) for s, m in spec.onsite.items() if s in inside]
    terms += [(k, m) for k, m in spec.pairs.items()
              if k[0] in inside and k[1] in inside]
    return HamiltonianOperator(support=block, d=spec.d,
                               matrix=_sum_terms(terms, block, spec.d))


def assemble_residual(spec: ModelSpec, partition: Partition) -> HamiltonianOperator:
    """U^R = H - sum_A H_A as a dense operator on the full lattice."""
    lattice = partition.lattice
    full = assemble_full(spec, lattice)
    support = full.support
    total = full.matrix.astype(complex)
    for block in partition.blocks:
        hb = assemble_block(spec, partition, block)
        total -= embed_operator(hb.matrix, block, support, spec.d)
    return HamiltonianOperator(support=support, d=spec.d, matrix=real_if_close(total))


@dataclass(frozen=True)
class ResidualBound:
    sum_bound: float
    exact_norm: float
    cut_term_count: int
    remainder_onsite: float


def residual_norm_bound(spec: ModelSpec, partition: Partition,
                        want_exact: bool = True) -> ResidualBound:
    """Triangle-inequality bound on ||U^R||, with the exact norm when it fits.

    sum_bound adds the stored norm of every pair term not inside a single
    block, plus on-site norms on remainder sites of lenient partitions.
    """
    owner = partition.block_of()
    total = 0.0
    count = 0
    for (i, j), mat in spec.pairs.items():
        if owner[i] >= 0 and owner[i] == owner[j]:
            continue
        total += hermitian_norm(mat)
        count += 1
    rem_onsite = sum(hermitian_norm(spec.onsite[s])
                     for s in partition.remainder if s in spec.onsite)
    exact = None
    if want_exact:
        try:
            budget.check_matrix(spec.d ** partition.lattice.V, "residual operator")
        except budget.BudgetError:
            exact = None
        else:
            exact = assemble_residual(spec, partition).norm
    return ResidualBound(sum_bound=total + rem_onsite, exact_norm=exact,
                         cut_term_count=count, remainder_onsite=rem_onsite)


def block_cut_sum(spec: ModelSpec, partition: Partition, block) -> float:
    """Stored-norm sum of pair terms crossing the boundary of one block.

    This is the per-block interaction budget entering the entropy-rate and
    local-control caps; a bond between two blocks contributes its full stored
    norm to both blocks' sums.
    """
    inside = set(block)
    total = 0.0
    for (i, j), mat in spec.pairs.items():
        if (i in inside) != (j in inside):
            total += hermitian_norm(mat)
    return total


def ising_zz_field(lattice: Lattice, h: float = 1.0, J: float = 1.0,
                   u0: float = None, delta: float = 1.0) -> ModelSpec:
    """H = -J sum_<ij> s^z s^z - h sum_i s^z (the worked-example chain)."""
    onsite = {s: -h * SZ for s in lattice.sites()} if h != 0.0 else {}
    pairs = {}
    for i, j in nn_bonds(lattice):
        key = (min(i, j), max(i, j))
        pairs[key] = pairs.get(key, 0.0) + (-J) * two_site(SZ, SZ)
    if u0 is None:
        u0 = minimal_admissible_u0(onsite, pairs, lattice, delta)
    return ModelSpec(d=2, onsite=onsite, pairs=pairs, u0=u0, delta=delta)


def mixed_field_ising(lattice: Lattice, g: float = 1.05, h: float = 0.5,
                      J: float = 1.0, u0: float = None,
                      delta: float = 1.0) -> ModelSpec:
    """Nonintegrable testbed -J sum s^z s^z - g sum s^x - h sum s^z.

    g = 1.05, h = 0.5 are conventional defaults for eigenstate-thermalization
    studies, recorded in reports as configuration, not asserted values.
    """
    onsite = {s: -g * SX - h * SZ for s in lattice.sites()}
    pairs = {}
    for i, j in nn_bonds(lattice):
        key = (min(i, j), max(i, j))
        pairs[key] = pairs.get(key, 0.0) + (-J) * two_site(SZ, SZ)
    if u0 is None:
        u0 = minimal_admissible_u0(onsite, pairs, lattice, delta)
    return ModelSpec(d=2, onsite=onsite, pairs=pairs, u0=u0, delta=delta)


def minimal_admissible_u0(onsite, pairs, lattice, delta):
    minimal = 0.0
    for mat in onsite.values():
        minimal = max(minimal, hermitian_norm(np.asarray(mat, dtype=complex)))
    for (i, j), mat in pairs.items():
        r = distance(lattice, i, j)
        minimal = max(minimal, hermitian_norm(np.asarray(mat, dtype=complex))
                      * (1.0 + r) ** (lattice.D + delta))
    return minimal if minimal > 0 else 1.0
