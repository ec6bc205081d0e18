"""Two-site entanglement: density matrix, concurrence, totals and bounds.

The translationally invariant two-site state at separation d is an
X-state with unnormalized coefficients (trace of rho is (a+2b+dd)/4 = 1)

    a  = 1 + 2 P_z0 + P_zz        f = P_xx - P_yy   (outer antidiagonal)
    dd = 1 - 2 P_z0 + P_zz        e = P_xx + P_yy   (inner antidiagonal)
    b  = 1 - P_zz

Its concurrence has the closed form

    C = max{0, (|f| - b)/2, (|e| - sqrt(a*dd))/2}

which reproduces the general spin-flip (Wootters) concurrence; both are
implemented and compared in the tests.  Distance profiles C_d feed the
totals C^N = 2 sum_{d<=N} C_d and tau^N = 2 sum tau_d, the truncation
lengths, the monogamy bounds tau^N <= 1 and C^N <= sqrt(N-1), and the
saturation relation C_inf ~ 2*xi*tau_inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlators import CorrelatorTable, QuadratureConfig, correlator_table, \
    p_coefficients
from .errors import NonPhysicalStateError
from .model import ModelParams

_POSITIVITY_TOL = 1e-9
_XI_CUT_THRESHOLD = 1e-8
_XI_FIT_THRESHOLD = 1e-10
_CONVERGENCE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class TwoSiteState:
    """Independent entries of the two-site X-state (unnormalized by 4)."""

    d: int
    a: float
    rho_dd: float
    b: float
    e: float
    f: float

    def density_matrix(self) -> np.ndarray:
        """The 4x4 matrix in the (uu, ud, du, dd) product basis."""
        return 0.25 * np.array([
            [self.a, 0.0, 0.0, self.f],
            [0.0, self.b, self.e, 0.0],
            [0.0, self.e, self.b, 0.0],
            [self.f, 0.0, 0.0, self.rho_dd],
        ])


def two_site_state(d: int, tbl: CorrelatorTable) -> TwoSiteState:
    """Assemble rho_d coefficients from the correlator table.

    Positivity violations within 1e-9 are clamped; larger ones raise
    NonPhysicalStateError (they indicate a quadrature or determinant
    failure upstream, not physics).
    """
    pc = p_coefficients(d, tbl)
    a = pc.p00 + 2.0 * pc.pz0 + pc.pzz
    dd = pc.p00 - 2.0 * pc.pz0 + pc.pzz
    b = pc.p00 - pc.pzz
    e = pc.pxx + pc.pyy
    f = pc.pxx - pc.pyy

    def clamp_nonneg(name, val):
        if val < -_POSITIVITY_TOL:
            raise NonPhysicalStateError(
                f"rho_{d}: diagonal coefficient {name} = {val:.3e} < 0")
        return max(val, 0.0)

    a = clamp_nonneg("a", a)
    dd = clamp_nonneg("d", dd)
    b = clamp_nonneg("b", b)
    f_lim = math.sqrt(a * dd)
    if abs(f) > f_lim + _POSITIVITY_TOL:
        raise NonPhysicalStateError(
            f"rho_{d}: |f| = {abs(f):.3e} exceeds sqrt(a*d) = {f_lim:.3e}")
    if abs(e) > b + _POSITIVITY_TOL:
        raise NonPhysicalStateError(
            f"rho_{d}: |e| = {abs(e):.3e} exceeds b = {b:.3e}")
    f = math.copysign(min(abs(f), f_lim), f)
    e = math.copysign(min(abs(e), b), e)
    return TwoSiteState(d=d, a=a, rho_dd=dd, b=b, e=e, f=f)


def concurrence(s: TwoSiteState) -> float:
    """Closed-form X-state concurrence of rho_d."""
    return concurrence_branch(s)[0]


def concurrence_branch(s: TwoSiteState) -> tuple[float, str]:
    """Concurrence together with the active branch of the max{...}.

    The branch label ("zero", "f" or "e") is used by the criticality
    module to discard derivative stencils that straddle a kink.
    """
    prod = max(s.a * s.rho_dd, 0.0)  # roundoff can drive a*d twice negative
    c_f = 0.5 * (abs(s.f) - s.b)
    c_e = 0.5 * (abs(s.e) - math.sqrt(prod))
    best, label = 0.0, "zero"
    if c_f > best:
        best, label = c_f, "f"
    if c_e > best:
        best, label = c_e, "e"
    return best, label


def wootters_concurrence(rho: np.ndarray) -> float:
    """General two-qubit concurrence by the spin-flip construction.

    C = max{0, l1 - l2 - l3 - l4} with l_i the decreasing square roots
    of the eigenvalues of rho (sy x sy) rho* (sy x sy), evaluated here
    through the Hermitian form sqrt(rho) rho_tilde sqrt(rho).  Input
    must be Hermitian, unit trace and positive semidefinite to 1e-9.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("expected a 4x4 density matrix")
    if np.abs(rho - rho.conj().T).max() > 1e-9:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ValueError("density matrix must have unit trace")
    evals, evecs = np.linalg.eigh(rho)
    if evals.min() < -_POSITIVITY_TOL:
        raise ValueError(f"density matrix not PSD (min eigenvalue "
                         f"{evals.min():.3e})")
    evals = np.clip(evals, 0.0, None)
    sqrt_rho = (evecs * np.sqrt(evals)) @ evecs.conj().T
    yy = np.zeros((4, 4), dtype=complex)
    yy[0, 3], yy[1, 2], yy[2, 1], yy[3, 0] = -1.0, 1.0, 1.0, -1.0
    rho_tilde = yy @ rho.conj() @ yy
    m = sqrt_rho @ rho_tilde @ sqrt_rho
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(m), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True)
class EntanglementProfile:
    """Concurrence profile C_d with truncation lengths and totals."""

    params: ModelParams
    c_d: np.ndarray          # C_d for d = 1..d_max
    xi_cut: int              # support length: max d with C_d > 1e-8
    xi_fit: float            # exponential decay length (nan if < 2 points)
    converged: bool          # C_{d_max} < 1e-12
    tail_bound: float        # geometric estimate of the truncated tail
    fit_r2: float = math.nan

    @property
    def d_max(self) -> int:
        return self.c_d.size

    @property
    def tau_d(self) -> np.ndarray:
        return self.c_d ** 2

    def c_total(self, n: int) -> float:
        """Partial sum C^N = 2 sum_{d=1}^N C_d."""
        return 2.0 * float(self.c_d[:n].sum())

    def tau_total(self, n: int) -> float:
        return 2.0 * float((self.c_d[:n] ** 2).sum())

    @property
    def c_inf(self) -> float:
        return self.c_total(self.d_max)

    @property
    def tau_inf(self) -> float:
        return self.tau_total(self.d_max)


def _fit_decay(c_d: np.ndarray, xi_cut: int):
    """Decay length from the exponential regime; returns (xi_fit, r^2).

    C_d is exponential only well inside the support: approaching the
    truncation point the max{0, ...} argument crosses zero and ln C_d
    plunges, which would corrupt a global fit.  The line is therefore
    fitted over d <= xi_cut/2 (all qualifying d when the support is too
    short to split).
    """
    d = np.arange(1, c_d.size + 1, dtype=float)
    mask = c_d > _XI_FIT_THRESHOLD
    if xi_cut >= 4:
        mask &= d <= max(xi_cut // 2, 2)
    if mask.sum() < 2:
        return math.nan, math.nan
    x, y = d[mask], np.log(c_d[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    if slope >= 0.0:
        return math.inf, r2
    return -1.0 / slope, r2


def entanglement_profile(p: ModelParams, d_max: int,
                         q: QuadratureConfig = QuadratureConfig(),
                         tbl: CorrelatorTable | None = None) -> EntanglementProfile:
    """Compute C_d for d = 1..d_max and the derived summary quantities.

    A pre-built correlator table may be passed to share it between
    consumers; it must cover x_max >= d_max.
    """
    if d_max < 2:
        raise ValueError("d_max must be >= 2")
    if tbl is None:
        tbl = correlator_table(p, d_max, q)
    elif tbl.x_max < d_max:
        raise ValueError("supplied table too small for d_max")
    c_d = np.empty(d_max)
    for d in range(1, d_max + 1):
        c_d[d - 1] = concurrence(two_site_state(d, tbl))
    above = np.where(c_d > _XI_CUT_THRESHOLD)[0]
    xi_cut = int(above[-1] + 1) if above.size else 0
    xi_fit, r2 = _fit_decay(c_d)
    c_last = c_d[-1]
    converged = bool(c_last < _CONVERGENCE_THRESHOLD)
    if c_last > 0.0 and math.isfinite(xi_fit) and xi_fit > 0.0:
        r = math.exp(-1.0 / xi_fit)
        tail = 2.0 * c_last * r / (1.0 - r)
    else:
        tail = 0.0
    return EntanglementProfile(params=p, c_d=c_d, xi_cut=xi_cut,
                               xi_fit=xi_fit, converged=converged,
                               tail_bound=tail, fit_r2=r2)


def converged_profile(p: ModelParams, q: QuadratureConfig = QuadratureConfig(),
                      d_start: int = 32, d_cap: int = 2048,
                      support_factor: int = 4) -> EntanglementProfile:
    """Grow d_max until the profile converges and covers 4*xi_cut.

    Doubles d_max from d_start up to d_cap; the support_factor margin
    keeps the partial-sum saturation checks meaningful.  Returns the
    last profile (converged flag tells whether the cap was hit).
    """
    d_max = d_start
    while True:
        prof = entanglement_profile(p, d_max, q)
        enough = prof.converged and d_max >= support_factor * max(prof.xi_cut, 1)
        if enough or d_max >= d_cap:
            return prof
        d_max = min(2 * d_max, d_cap)


@dataclass(frozen=True)
class MonogamyReport:
    """Margins of the two monogamy bounds over every partial sum."""

    tau_inf: float
    c_inf: float
    tau_margin: float        # min over N of 1 - tau^N
    c_margin: float          # min over N >= 2 of sqrt(N-1) - C^N
    tau_ok: bool
    c_ok: bool


def check_monogamy(profile: EntanglementProfile) -> MonogamyReport:
    """Verify tau^N <= 1 and C^N <= sqrt(N-1) on every partial sum.

    These are theorems for the chain ground state; a violation means an
    implementation bug upstream, so the report carries the margins
    rather than raising.
    """
    c_cum = 2.0 * np.cumsum(profile.c_d)
    tau_cum = 2.0 * np.cumsum(profile.c_d ** 2)
    tau_margin = float((1.0 - tau_cum).min())
    n = np.arange(1, profile.d_max + 1)
    mask = n >= 2
    c_margin = float((np.sqrt(n[mask] - 1.0) - c_cum[mask]).min())
    return MonogamyReport(tau_inf=profile.tau_inf, c_inf=profile.c_inf,
                          tau_margin=tau_margin, c_margin=c_margin,
                          tau_ok=tau_margin >= 0.0, c_ok=c_margin >= 0.0)


@dataclass(frozen=True)
class KbiReport:
    """Saturation-relation ratios: r1 = C_inf / (2 xi_fit tau_inf)."""

    xi_fit: float
    r1: float
    r2: float                # tau_inf * xi_fit, trend quantity
    within_bounds: bool      # r1 in [0.5, 2]


def check_kbi_relation(profile: EntanglementProfile,
                       min_xi: float = 5.0) -> KbiReport:
    """Evaluate the generalized sharing bound C_inf ~ 2 xi tau_inf.

    The relation is asymptotic in the truncation length; profiles with
    xi_fit < 5 are refused (ValueError) rather than scored.
    """
    xi = profile.xi_fit
    if not math.isfinite(xi) or xi < min_xi:
        raise ValueError(f"xi_fit = {xi} below asymptotic threshold {min_xi}")
    if not profile.converged:
        raise ValueError("profile not converged; extend d_max first")
    r1 = profile.c_inf / (2.0 * xi * profile.tau_inf)
    r2 = profile.tau_inf * xi
    return KbiReport(xi_fit=xi, r1=r1, r2=r2,
                     within_bounds=0.5 <= r1 <= 2.0)


def lmg_reference_concurrence(lam: float, gamma: float, n: int) -> float:
    """Closed-form pair concurrence of the uniformly coupled spin model.

    C = (1 - sqrt((1-lam)/(1-gamma*lam))) / (N-1), valid for lam < 1 and
    gamma*lam < 1.  Serves as the comparison baseline where the qubit
    count N plays the role the truncation length xi plays in the chain.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if lam >= 1.0 or gamma * lam >= 1.0:
        raise ValueError("requires lam < 1 and gamma*lam < 1")
    return (1.0 - math.sqrt((1.0 - lam) / (1.0 - gamma * lam))) / (n - 1)


def profile_rows(profile: EntanglementProfile):
    """CSV rows (d, C_d, tau_d) for serialization."""
    return [(d + 1, float(profile.c_d[d]), float(profile.c_d[d] ** 2))
            for d in range(profile.d_max)]


def profile_summary(profile: EntanglementProfile) -> dict:
    """JSON-ready summary with truncation lengths, totals and margins."""
    rep = check_monogamy(profile)
    xi_fit = profile.xi_fit
    return {
        "mu": profile.params.mu,
        "t": profile.params.t,
        "delta": profile.params.delta,
        "alpha": profile.params.alpha,
        "beta": profile.params.beta,
        "d_max": profile.d_max,
        "xi_cut": profile.xi_cut,
        "xi_fit": None if not math.isfinite(xi_fit) else xi_fit,
        "fit_r2": None if not math.isfinite(profile.fit_r2) else profile.fit_r2,
        "c_inf": profile.c_inf,
        "tau_inf": profile.tau_inf,
        "converged": profile.converged,
        "tail_bound": profile.tail_bound,
        "tau_margin": rep.tau_margin,
        "c_margin": rep.c_margin,
    }
