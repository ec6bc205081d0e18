"""Independent ground truth from exact diagonalization of a finite ring.

The closed-form path (quadrature correlators + Toeplitz determinants)
is validated against a periodic N-site ring with the same couplings
truncated at range_cut.  Two solver routes are provided and must agree:

* dense: build the full 2N x 2N particle-hole matrix in real space and
  diagonalize it, never using momentum-space resummations;
* momentum: N independent 2x2 pairing problems on the discrete k grid
  with truncated coupling sums.

Ground-state correlations converge exponentially to the infinite chain
in any gapped phase.  Two-site density matrices are rebuilt from Wick's
theorem: spin operators map to Majorana strings (string convention
chosen so sigma^z = 2n - 1) whose expectations are Pfaffians of the
pairwise contraction matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGroundStateError
from .model import ModelParams

_DEGENERACY_TOL = 1e-10
_WICK_RANGE_LIMIT = 64


@dataclass(frozen=True)
class RingConfig:
    """Finite periodic ring used as the brute-force reference."""

    params: ModelParams
    n_sites: int = 512
    range_cut: int | None = None  # defaults to n_sites // 2 - 1

    def __post_init__(self):
        if self.n_sites % 2 != 0 or self.n_sites < 4:
            raise ValueError("n_sites must be even and >= 4")
        rc = self.resolved_range()
        if not 1 <= rc < self.n_sites // 2:
            raise ValueError("range_cut must satisfy 1 <= range_cut < n/2")

    def resolved_range(self) -> int:
        return self.n_sites // 2 - 1 if self.range_cut is None else self.range_cut


@dataclass(frozen=True)
class GroundStateCorrelations:
    """Wick data of the ring ground state: <c_i^dag c_j> and <c_i c_j>."""

    hop: np.ndarray
    pair: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.hop.shape[0]


def _couplings(cfg: RingConfig):
    p = cfg.params
    d = np.arange(1, cfg.resolved_range() + 1)
    t_d = p.t * np.exp(-p.alpha * d + p.alpha)
    delta_d = p.delta * np.exp(-p.beta * d + p.beta)
    return d, t_d, delta_d


def _dense_blocks(cfg: RingConfig):
    """Real-space blocks: H = sum A_ij c_i^dag c_j + 1/2 (B_ij c_i^dag c_j^dag + h.c.)."""
    n = cfg.n_sites
    p = cfg.params
    d_arr, t_d, delta_d = _couplings(cfg)
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    np.fill_diagonal(a, -p.mu)
    for d, t, dl in zip(d_arr, t_d, delta_d):
        for i in range(n):
            j = (i + d) % n
            a[i, j] -= t
            a[j, i] -= t
            # pairing term Delta(d) c_{i+d}^dag c_i^dag
            b[j, i] += dl
            b[i, j] -= dl
    return a, b


def diagonalize_ring(cfg: RingConfig, method: str = "dense") -> GroundStateCorrelations:
    """Ground-state correlations of the ring, by the requested route.

    method "dense" diagonalizes the 2N x 2N real-space particle-hole
    matrix; "momentum" solves the N 2x2 sector problems.  Both fill the
    negative-energy modes (equivalently, take the lower-energy parity
    sector) and agree to 1e-12 away from gap closings.

    Raises DegenerateGroundStateError when the smallest quasiparticle
    energy is below tolerance (gapless ring: correlations ill-defined).
    """
    if method == "dense":
        return _diagonalize_dense(cfg)
    if method == "momentum":
        return _diagonalize_momentum(cfg)
    raise ValueError(f"unknown method {method!r}")


def _diagonalize_dense(cfg: RingConfig) -> GroundStateCorrelations:
    n = cfg.n_sites
    a, b = _dense_blocks(cfg)
    h = np.block([[a, b], [-b, -a]])
    evals, evecs = np.linalg.eigh(h)
    scale = max(np.abs(evals).max(), 1.0)
    if np.abs(evals).min() < _DEGENERACY_TOL * scale:
        raise DegenerateGroundStateError(
            "ring spectrum has a near-zero mode; ground state degenerate")
    pos = evecs[:, evals > 0.0]          # N positive-energy modes
    phi, psi = pos[:n, :], pos[n:, :]    # gamma = phi^T c + psi^T c^dag
    hop = psi @ psi.T
    pair = phi @ psi.T
    hop = 0.5 * (hop + hop.T)
    pair = 0.5 * (pair - pair.T)
    return GroundStateCorrelations(hop=hop, pair=pair)


def _diagonalize_momentum(cfg: RingConfig) -> GroundStateCorrelations:
    n = cfg.n_sites
    p = cfg.params
    d_arr, t_d, delta_d = _couplings(cfg)
    k = 2.0 * math.pi * np.arange(n) / n
    kd = np.outer(k, d_arr)
    xi = -p.mu - 2.0 * np.cos(kd) @ t_d          # single-particle band
    dl = 2.0 * np.sin(kd) @ delta_d              # pairing amplitude
    energy = np.hypot(xi, dl)
    scale = max(energy.max(), 1.0)
    if energy.min() < _DEGENERACY_TOL * scale:
        raise DegenerateGroundStateError(
            "momentum sector with near-zero quasiparticle energy")

    # even-parity sector ground state of each (k, -k) pair:
    # occupation |a1|^2 and anomalous amplitude conj(a0)*a1 with
    # (a0, a1) the lowest eigenvector of [[0, i*dl], [-i*dl, 2*xi]]
    denom = dl * dl + (xi - energy) ** 2
    ok = denom > 0.0
    occ = np.where(ok, np.divide((xi - energy) ** 2, denom, where=ok), 0.5)
    anom = np.where(ok, np.divide(-dl * (xi - energy), denom, where=ok), 0.0)
    # unpaired momenta (k = 0, pi): occupied iff xi < 0
    for j in (0, n // 2):
        occ[j] = 1.0 if xi[j] < 0.0 else 0.0
        anom[j] = 0.0

    x = np.arange(n)
    kx = np.outer(k, x)
    hop_row = (np.cos(kx).T @ occ) / n            # <c_0^dag c_x>, real even
    pair_row = -(np.sin(kx).T @ anom) / n         # <c_0 c_x>, real odd
    hop = _circulant(hop_row)
    pair = _circulant(pair_row)                   # odd row -> antisymmetric
    return GroundStateCorrelations(hop=0.5 * (hop + hop.T),
                                   pair=0.5 * (pair - pair.T))


def _circulant(row):
    n = row.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def ring_g_correlator(corr: GroundStateCorrelations, x: int,
                      base_site: int = 0) -> float:
    """G_x on the ring: <A_i B_{i+x}> with A = c^dag + c, B = c^dag - c."""
    n = corr.n_sites
    i = base_site % n
    j = (base_site + x) % n
    val = -2.0 * (corr.hop[i, j] + corr.pair[i, j])
    if i == j:
        val += 1.0
    return float(val)


# ---------------------------------------------------------------------------
# Wick reconstruction of the two-site (spin) density matrix

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid, pivoted)."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n % 2 == 1:
        return 0.0
    if n == 0:
        return 1.0
    val = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp]] = a[[kp, k + 1]]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            val = -val
        if a[k + 1, k] == 0.0:
            return 0.0
        val *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col)
            a[k + 2:, k + 2:] -= np.outer(col, tau)
    return val


class _Contractions:
    """Pairwise Majorana contractions over a site window.

    Operators are labelled (0, site) for A_site = c^dag + c and
    (1, site) for B_site = c^dag - c.  For the real-coupling ring
    <A A> = delta, <B B> = -delta exactly, and <A_l B_m> follows from
    the hop/pair matrices.
    """

    def __init__(self, corr: GroundStateCorrelations):
        n = corr.n_sites
        self.g_ab = np.eye(n) - 2.0 * (corr.hop + corr.pair)

    def value(self, op1, op2):
        t1, s1 = op1
        t2, s2 = op2
        if t1 == t2:
            return 0.0 if s1 != s2 else (1.0 if t1 == 0 else -1.0)
        if t1 == 0:  # <A B>
            return self.g_ab[s1, s2]
        return -self.g_ab[s2, s1]  # <B A> = -<A B> transposed


def _string_expectation(ops, contractions) -> float:
    m = len(ops)
    c = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            c[i, j] = contractions.value(ops[i], ops[j])
    c -= c.T
    return pfaffian(c)


def wick_two_site(corr: GroundStateCorrelations, i: int, j: int) -> np.ndarray:
    """Two-site density matrix rho_{ij} rebuilt from Wick contractions.

    Evaluates all parity-even two-site Pauli expectations (z, zz, xx,
    yy, xy, yx) as Pfaffians of Jordan-Wigner Majorana strings; the
    parity-odd ones vanish identically in the ring ground state.  Basis
    order is (up,up), (up,down), (down,up), (down,down) with spin-up
    the occupied fermion state (sigma^z = 2n - 1).
    """
    n = corr.n_sites
    m, nn = i % n, j % n
    if m == nn:
        raise ValueError("sites must differ")
    if m > nn:
        m, nn = nn, m
        swap = True
    else:
        swap = False
    if nn - m > _WICK_RANGE_LIMIT:
        raise ValueError(f"separation {nn - m} exceeds Wick string limit "
                         f"{_WICK_RANGE_LIMIT}")
    con = _Contractions(corr)
    A, B = 0, 1
    mid = [(t, s) for s in range(m + 1, nn) for t in (B, A)]

    def ex(ops, pref=1.0):
        return pref * _string_expectation(ops, con)

    vals = {
        ("z", "i"): ex([(B, m), (A, m)]),
        ("i", "z"): ex([(B, nn), (A, nn)]),
        ("z", "z"): ex([(B, m), (A, m), (B, nn), (A, nn)]),
        ("x", "x"): ex([(B, m), *mid, (A, nn)], -1.0),
        ("y", "y"): ex([(A, m), *mid, (B, nn)], +1.0),
        ("x", "y"): 0.0,
        ("y", "x"): 0.0,
    }
    # xy/yx carry a factor i times a Pfaffian that vanishes by operator
    # counting (#A != #B); evaluate anyway as a structural check
    vals[("x", "y")] = 1.0j * ex([(B, m), *mid, (B, nn)], +1.0)
    vals[("y", "x")] = 1.0j * ex([(A, m), *mid, (A, nn)], +1.0)

    rho = np.eye(4, dtype=complex)
    for (am, an), v in vals.items():
        rho += v * np.kron(_PAULI[am], _PAULI[an])
    rho /= 4.0
    rho = 0.5 * (rho + rho.conj().T)
    if swap:
        perm = [0, 2, 1, 3]
        rho = rho[np.ix_(perm, perm)]
    return rho
