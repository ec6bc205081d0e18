"""Single-particle data of the long-range p-wave chain.

The chain has hopping t(d) = t*exp(-alpha*|d| + alpha) and pairing
Delta(d) = Delta*exp(-beta*|d| + beta) between sites at separation d.
Resumming the geometric tails gives closed-form Bloch coefficients

    eps1(k) = mu + t*e^alpha * (cos k - e^-alpha) / (cosh alpha - cos k)
    eps2(k) = Delta*e^beta * sin k / (cosh beta - cos k)

with quasiparticle energy E(k) = sqrt(eps1^2 + eps2^2) and global gap
E_g = min_k 2E(k).  The gap closes on the curves

    alpha* = ln(mu / (2t + mu))   (at k = 0,  requires mu < -2t)
    alpha* = ln(mu / (2t - mu))   (at k = pi, requires t < mu < 2t)

independent of Delta and beta, because eps2 vanishes at k = 0, pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain Hamiltonian.

    mu      chemical potential (units of t)
    t       hopping amplitude, the overall energy scale
    delta   pairing amplitude
    alpha   hopping decay rate (> 0)
    beta    pairing decay rate (> 0)
    """

    mu: float
    t: float = 1.0
    delta: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ValueError(f"alpha must be > 0 (got {self.alpha}); "
                             "the alpha -> 0 limit diverges")
        if not (self.beta > 0.0):
            raise ValueError(f"beta must be > 0 (got {self.beta})")
        if self.t == 0.0:
            raise ValueError("t is the energy scale and must be nonzero")
        for name in ("mu", "t", "delta", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def replace(self, **kw) -> "ModelParams":
        fields = dict(mu=self.mu, t=self.t, delta=self.delta,
                      alpha=self.alpha, beta=self.beta)
        fields.update(kw)
        return ModelParams(**fields)


@dataclass(frozen=True)
class DispersionSample:
    """Bloch coefficients and energy at one momentum."""

    k: float
    eps1: float
    eps2: float
    energy: float


@dataclass(frozen=True)
class PhaseBoundary:
    """One gap-closing line: alpha* at fixed mu (or mu* at fixed alpha)."""

    alpha_star: float
    branch: str              # "plus" for 2t+mu, "minus" for 2t-mu
    closing_momentum: float  # 0.0 or pi


def epsilon1(k, p: ModelParams):
    """Resummed hopping band eps1(k); even in k.  Accepts scalar or array k."""
    k = np.asarray(k, dtype=float)
    num = np.cos(k) - math.exp(-p.alpha)
    den = math.cosh(p.alpha) - np.cos(k)
    out = p.mu + p.t * math.exp(p.alpha) * num / den
    return out if out.ndim else float(out)


def epsilon2(k, p: ModelParams):
    """Resummed pairing amplitude eps2(k); odd in k, zero at k = 0, pi."""
    k = np.asarray(k, dtype=float)
    den = math.cosh(p.beta) - np.cos(k)
    out = p.delta * math.exp(p.beta) * np.sin(k) / den
    return out if out.ndim else float(out)


def band_energy(k: float, p: ModelParams) -> DispersionSample:
    """Positive-branch quasiparticle energy E(k) with its components."""
    e1 = epsilon1(k, p)
    e2 = epsilon2(k, p)
    return DispersionSample(k=float(k), eps1=e1, eps2=e2,
                            energy=math.hypot(e1, e2))


def _energy_grid(p: ModelParams, n: int):
    k = np.linspace(0.0, math.pi, n)
    return k, np.hypot(epsilon1(k, p), epsilon2(k, p))


def gap_argmin(p: ModelParams, k_resolution: int = 4096) -> tuple[float, float]:
    """Minimum of E(k) over [0, pi] and its location.

    Dense grid scan followed by bounded golden-section/Brent refinement
    around the three lowest grid minima; E(k) is even so [0, pi] covers
    the zone.  Returns (E_min, k_min) with k resolved to ~1e-9.
    """
    if k_resolution < 64:
        raise ValueError("k_resolution must be >= 64")
    k, e = _energy_grid(p, k_resolution)

    # local minima of the sampled curve, endpoints included
    interior = np.where((e[1:-1] <= e[:-2]) & (e[1:-1] <= e[2:]))[0] + 1
    cand = np.concatenate(([0, k.size - 1], interior))
    cand = cand[np.argsort(e[cand])][:3]

    def ek(x):
        return math.hypot(epsilon1(x, p), epsilon2(x, p))

    # grid values first: closings sit exactly at k = 0 or pi, which the
    # interior-point refinement below can only approach
    i_best = int(cand[0])
    best_e, best_k = float(e[i_best]), float(k[i_best])
    h = k[1] - k[0]
    for i in cand:
        lo = max(0.0, k[i] - h)
        hi = min(math.pi, k[i] + h)
        res = minimize_scalar(ek, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-9})
        if res.fun < best_e:
            best_e, best_k = float(res.fun), float(res.x)
    return best_e, best_k


def global_gap(p: ModelParams, k_resolution: int = 4096) -> float:
    """Global energy gap E_g = min_k 2E(k)."""
    e_min, _ = gap_argmin(p, k_resolution)
    return 2.0 * e_min


def phase_boundary(p: ModelParams) -> list[PhaseBoundary]:
    """Analytic gap-closing decay rates alpha* for the given mu, t.

    Solves eps1(0) = 0 and eps1(pi) = 0 for alpha; each has a positive
    solution only when mu/(2t +- mu) > 1.  Independent of delta and beta.
    Returns an empty list when no boundary exists (e.g. |mu| small).
    """
    if p.t <= 0.0:
        raise ValueError("phase_boundary assumes t > 0")
    out = []
    arg_plus = _safe_ratio(p.mu, 2.0 * p.t + p.mu)
    if arg_plus > 1.0:
        out.append(PhaseBoundary(alpha_star=math.log(arg_plus),
                                 branch="plus", closing_momentum=0.0))
    arg_minus = _safe_ratio(p.mu, 2.0 * p.t - p.mu)
    if arg_minus > 1.0:
        out.append(PhaseBoundary(alpha_star=math.log(arg_minus),
                                 branch="minus", closing_momentum=math.pi))
    return out


def boundary_mu(alpha: float, t: float = 1.0) -> list[PhaseBoundary]:
    """The same boundaries solved for mu at fixed alpha.

    mu*_plus  = -2t / (1 - e^-alpha)   (k = 0 closing)
    mu*_minus = +2t / (1 + e^-alpha)   (k = pi closing)

    The alpha_star field of the returned records carries mu*.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0")
    ema = math.exp(-alpha)
    return [
        PhaseBoundary(alpha_star=-2.0 * t / (1.0 - ema),
                      branch="plus", closing_momentum=0.0),
        PhaseBoundary(alpha_star=2.0 * t / (1.0 + ema),
                      branch="minus", closing_momentum=math.pi),
    ]


def _safe_ratio(num, den):
    if den == 0.0:
        return math.inf if num > 0 else -math.inf
    return num / den
