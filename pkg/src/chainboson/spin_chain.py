"""
Heisenberg SQUID chain: Hamiltonian, eigenbasis, interaction operators.

Single-site basis is the logical ``|0>, |1>`` pair, i.e. the eigenstates of
``sigma^x`` with eigenvalues +1 and -1.  In that basis ``sigma^x`` is
diagonal, ``sigma^z`` is the bit flip and the isotropic coupling
``sigma_j . sigma_k`` keeps its usual form (it is invariant under a common
rotation of both spins).  Site 1 is the leftmost tensor factor.

Units: hbar = 1, energies are angular frequencies in rad/ns.
"""

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

TWO_PI = 2.0 * np.pi
MAX_SITES = 4

# exchange quoted as the lowest transition it sets: 8J/h for two SQUIDs,
# 6J/h for three.  For four sites we use the lowest singlet-triplet gap of the ring, 4J.
HEISENBERG_SCALE = {1: 1.0, 2: 8.0, 3: 6.0, 4: 4.0}

_I2 = np.eye(2)
_SX = np.diag([1.0, -1.0]).astype(complex)            # sigma^x in |0>,|1>
_SY = np.array([[0.0, 1.0j], [-1.0j, 0.0]])            # sigma^y in |0>,|1>
_SZ = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)  # sigma^z: bit flip


class AlignmentError(RuntimeError):
    """A reference eigenvector does not lie in the expected eigenspace."""


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of a periodic Heisenberg chain.

    ``heisenberg_j`` and ``splitting_b`` are in rad/ns.  Use
    :meth:`from_ghz` to build one from GHz quantities.
    """

    n_sites: int
    heisenberg_j: float
    splitting_b: float
    periodic: bool = True

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_SITES:
            raise ValueError(
                f"n_sites must be in [1, {MAX_SITES}], got {self.n_sites}")
        if self.heisenberg_j < 0:
            raise ValueError("heisenberg_j must be >= 0 (antiferromagnetic)")
        if self.splitting_b < 0:
            raise ValueError("splitting_b must be >= 0")
        if not self.periodic:
            raise ValueError("only periodic chains are supported")

    @classmethod
    def from_ghz(cls, n_sites: int, heisenberg_ghz: float,
                 splitting_ghz: float) -> "ChainSpec":
        """Build from GHz values: ``heisenberg_ghz`` is 8J/h (N=2) or
        6J/h (N=3); ``splitting_ghz`` is 2B/h."""
        if not 1 <= n_sites <= MAX_SITES:
            raise ValueError(
                f"n_sites must be in [1, {MAX_SITES}], got {n_sites}")
        j = TWO_PI * heisenberg_ghz / HEISENBERG_SCALE[n_sites]
        b = TWO_PI * splitting_ghz / 2.0
        return cls(n_sites, j, b)

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator tagged with the basis it is written in."""

    data: np.ndarray
    basis: str = "computational"

    def __post_init__(self):
        if self.basis not in ("computational", "eigen"):
            raise ValueError(f"unknown basis tag {self.basis!r}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)

    @property
    def shape(self):
        return self.data.shape

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T)) < tol)


@dataclass(frozen=True)
class EigenSystem:
    """Eigen-decomposition of the chain Hamiltonian.

    Columns of ``basis`` are eigenvectors in the computational basis.  For
    N = 2 and N = 3 the columns follow the conventional psi_1 ... psi_D
    labelling (ascending in energy above the critical point); for other N
    they are sorted by energy.
    """

    spec: ChainSpec
    energies: np.ndarray
    basis: np.ndarray
    m_numbers: np.ndarray
    l_numbers: np.ndarray
    hamiltonian: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    def to_eigen(self, op) -> OperatorMatrix:
        m = np.asarray(op)
        if isinstance(op, OperatorMatrix) and op.basis == "eigen":
            return op
        return OperatorMatrix(self.basis.conj().T @ m @ self.basis, "eigen")

    def to_computational(self, op) -> OperatorMatrix:
        m = np.asarray(op)
        if isinstance(op, OperatorMatrix) and op.basis == "computational":
            return op
        return OperatorMatrix(self.basis @ m @ self.basis.conj().T,
                              "computational")

    def transition_frequencies(self) -> np.ndarray:
        """``w[a, b] = E_b - E_a``: energy released going from b to a."""
        e = self.energies
        return e[None, :] - e[:, None]


def _site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    factors = [_I2] * n
    factors[site] = op
    return reduce(np.kron, factors)


def _heisenberg_sum(n: int) -> np.ndarray:
    dim = 2 ** n
    h = np.zeros((dim, dim), dtype=complex)
    if n < 2:
        return h
    for j in range(n):
        k = (j + 1) % n
        for s in (_SX, _SY, _SZ):
            h += _site_operator(s, j, n) @ _site_operator(s, k, n)
    return h


def _magnetization(n: int) -> np.ndarray:
    return sum(_site_operator(_SX, j, n) for j in range(n))


def build_hamiltonian(spec: ChainSpec) -> OperatorMatrix:
    """Chain Hamiltonian ``sum_j (J s_j.s_{j+1} - B s_j^x)``, periodic.

    For two sites both bonds (1,2) and (2,1) are counted.
    """
    n = spec.n_sites
    h = spec.heisenberg_j * _heisenberg_sum(n) \
        - spec.splitting_b * _magnetization(n)
    return OperatorMatrix(h, "computational")


def _basis_state(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits))
    v[int(bits, 2)] = 1.0
    return v


def reference_vectors(n_sites: int) -> Optional[np.ndarray]:
    """Normalised psi-table eigenvectors as columns, or None if untabulated."""
    ket = _basis_state
    if n_sites == 1:
        vecs = [ket("0"), ket("1")]
    elif n_sites == 2:
        vecs = [ket("00"),
                ket("01") - ket("10"),
                ket("01") + ket("10"),
                ket("11")]
    elif n_sites == 3:
        vecs = [ket("000"),
                ket("001") - ket("100"),
                ket("001") + ket("100") - 2 * ket("010"),
                ket("001") + ket("100") + ket("010"),
                ket("011") - ket("110"),
                ket("011") + ket("110") - 2 * ket("101"),
                ket("011") + ket("110") + ket("101"),
                ket("111")]
    else:
        return None
    v = np.array(vecs, dtype=complex).T
    return v / np.linalg.norm(v, axis=0)


def _align(h: np.ndarray, refs: np.ndarray, tol: float) -> np.ndarray:
    evals, evecs = np.linalg.eigh(h)
    scale = max(np.max(np.abs(evals)), 1.0)
    deg_tol = 1e-9 * scale
    cols = []
    for idx in range(refs.shape[1]):
        r = refs[:, idx]
        e = np.real(r.conj() @ h @ r)
        sub = evecs[:, np.abs(evals - e) < deg_tol]
        v = sub @ (sub.conj().T @ r)
        resid = np.linalg.norm(r - v)
        if resid > tol:
            raise AlignmentError(
                f"reference psi_{idx + 1} leaves its eigenspace "
                f"(residual {resid:.3e})")
        cols.append(v / np.linalg.norm(v))
    basis = np.array(cols).T
    # degenerate references are already orthogonal; re-orthonormalise only
    # to scrub rounding
    q, r = np.linalg.qr(basis)
    return q * np.sign(np.real(np.diag(r)))


def _sector_diagonalize(h: np.ndarray, mz: np.ndarray) -> np.ndarray:
    m_diag = np.real(np.diag(mz))
    dim = len(m_diag)
    basis = np.zeros((dim, dim), dtype=complex)
    energies = np.zeros(dim)
    col = 0
    for m in sorted(set(np.round(m_diag).astype(int)), reverse=True):
        idx = np.flatnonzero(np.round(m_diag) == m)
        w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        for k in range(len(idx)):
            basis[idx, col] = v[:, k]
            energies[col] = w[k]
            col += 1
    order = np.argsort(energies, kind="stable")
    return basis[:, order]


def diagonalize(h: OperatorMatrix, spec: ChainSpec,
                align_tol: float = 1e-8) -> EigenSystem:
    """Diagonalise the chain Hamiltonian with a reproducible eigenbasis.

    Degenerate subspaces are rotated onto the tabulated reference states
    when they exist (N = 1, 2, 3).  Every column is a simultaneous
    eigenvector of H, of the Heisenberg sum and of the total ``sigma^x``.

    Raises
    ------
    AlignmentError
        If a reference vector is not an eigenvector to ``align_tol``.
    """
    hm = np.asarray(h)
    if not np.allclose(hm, hm.conj().T, atol=1e-12):
        raise ValueError("Hamiltonian is not Hermitian")
    n = spec.n_sites
    mz = _magnetization(n)
    refs = reference_vectors(n)
    if refs is not None:
        basis = _align(hm, refs, align_tol)
    else:
        basis = _sector_diagonalize(hm, mz)
    energies = np.real(np.einsum("ia,ij,ja->a", basis.conj(), hm, basis))
    m_numbers = np.rint(np.real(
        np.einsum("ia,ij,ja->a", basis.conj(), mz, basis))).astype(int)
    l_numbers = np.real(np.einsum("ia,ij,ja->a", basis.conj(),
                                  _heisenberg_sum(n), basis))
    return EigenSystem(spec, energies, basis, m_numbers, l_numbers, hm)


def eigensystem(spec: ChainSpec) -> EigenSystem:
    return diagonalize(build_hamiltonian(spec), spec)


def interaction_operator(spec: ChainSpec, j: int) -> OperatorMatrix:
    """``X_j = sigma^z_j`` (1-based site index), computational basis."""
    if not 1 <= j <= spec.n_sites:
        raise IndexError(f"site {j} out of range 1..{spec.n_sites}")
    return OperatorMatrix(_site_operator(_SZ, j - 1, spec.n_sites),
                          "computational")


def collective_operator(spec: ChainSpec) -> OperatorMatrix:
    """``J_z = sum_j X_j``, computational basis."""
    total = sum(np.asarray(interaction_operator(spec, j))
                for j in range(1, spec.n_sites + 1))
    return OperatorMatrix(total, "computational")


def interaction_operators_eigen(es: EigenSystem) -> np.ndarray:
    """Stack of all ``X_j`` in the eigenbasis, shape (N, D, D)."""
    return np.array([es.to_eigen(interaction_operator(es.spec, j)).data
                     for j in range(1, es.spec.n_sites + 1)])


@dataclass(frozen=True)
class FrequencyComponent:
    omega: float
    x_part: OperatorMatrix
    p_part: OperatorMatrix
    site_index: Optional[int] = None


def cluster_values(values: np.ndarray, tol: float) -> np.ndarray:
    """Replace each value by the mean of its tolerance cluster.

    Values within ``tol`` of zero are set to exactly zero.
    """
    flat = np.asarray(values, dtype=float).ravel()
    out = np.empty_like(flat)
    order = np.argsort(flat, kind="stable")
    start = 0
    for stop in range(1, len(order) + 1):
        if stop == len(order) or flat[order[stop]] - flat[order[stop - 1]] > tol:
            group = order[start:stop]
            centre = flat[group].mean()
            if np.any(np.abs(flat[group]) < tol):
                centre = 0.0
            out[group] = centre
            start = stop
    return out.reshape(np.shape(values))


def clustered_frequencies(es: EigenSystem, tol: float) -> np.ndarray:
    """Transition frequencies with +w and -w snapped to a common |w|."""
    w = es.transition_frequencies()
    mag = cluster_values(np.abs(w), tol)
    return np.where(mag == 0.0, 0.0, np.sign(w) * mag)


def default_freq_tol(es: EigenSystem) -> float:
    w = np.abs(es.transition_frequencies())
    return 1e-9 * max(w.max(), 1.0)


def frequency_components(op, es: EigenSystem,
                         freq_tol: Optional[float] = None,
                         site_index: Optional[int] = None
                         ) -> list[FrequencyComponent]:
    """Split an eigenbasis operator by transition frequency.

    Each component keeps the elements whose ``|E_b - E_a|`` matches its
    frequency.  The momentum-like part multiplies elements with
    ``E_b > E_a`` by ``-i`` and those with ``E_b < E_a`` by ``+i``; at zero
    frequency it vanishes because it is weighted by ``sin(0 * tau)``.
    """
    x = np.asarray(op)
    if isinstance(op, OperatorMatrix) and op.basis != "eigen":
        raise ValueError("operator must be in the eigenbasis")
    if freq_tol is None:
        freq_tol = default_freq_tol(es)
    if freq_tol <= 0:
        raise ValueError("freq_tol must be positive")
    w = clustered_frequencies(es, freq_tol)
    absw = np.abs(w)
    comps = []
    for omega in np.unique(absw):
        sel = absw == omega
        xp = np.where(sel, x, 0.0).astype(complex)
        pp = -1j * np.sign(w) * xp
        comps.append(FrequencyComponent(float(omega),
                                        OperatorMatrix(xp, "eigen"),
                                        OperatorMatrix(pp, "eigen"),
                                        site_index))
    return comps


@dataclass(frozen=True)
class TransitionNetwork:
    """Undirected graph over eigenstates (0-based indices)."""

    edges: frozenset
    components: tuple

    def labels(self) -> list[tuple[int, ...]]:
        """Components with 1-based psi labels."""
        return [tuple(i + 1 for i in c) for c in self.components]

    def edge_labels(self) -> set[tuple[int, int]]:
        return {(a + 1, b + 1) for a, b in self.edges}


def network_from_weights(weights: np.ndarray,
                         threshold: float) -> TransitionNetwork:
    w = np.asarray(weights)
    w = 0.5 * (np.abs(w) + np.abs(w.T))
    adj = w > threshold
    np.fill_diagonal(adj, False)
    n_comp, labels = connected_components(csr_matrix(adj), directed=False)
    comps = []
    for c in range(n_comp):
        comps.append(tuple(int(i) for i in np.flatnonzero(labels == c)))
    comps.sort()
    edges = frozenset((int(a), int(b)) for a, b in zip(*np.nonzero(np.triu(adj))))
    return TransitionNetwork(edges, tuple(comps))


def transition_network(es: EigenSystem, ops: Sequence,
                       rate_threshold: float = 1e-12) -> TransitionNetwork:
    """Selection-rule network: edge (a, b) when ``sum |X_ab|^2`` over the
    supplied eigenbasis operators exceeds ``rate_threshold``.

    Pass ``[X_1, ..., X_N]`` for independent coupling or ``[J_z]`` for a
    collective one.
    """
    if len(ops) == 0:
        raise ValueError("need at least one operator")
    weight = sum(np.abs(np.asarray(op)) ** 2 for op in ops)
    return network_from_weights(weight, rate_threshold)
