"""Optimal receiver design: closed forms, baselines, and a numeric oracle.

The closed-form results say that the MI-maximizing design uses the same
splitting ratio at every antenna (a root of a quartic in the noise powers,
independent of the channel and the transmit power) and combining weights
proportional to the squared channel magnitude in both branches.  The numeric
optimizer here maximizes the same closed-form MI surface directly, by
multi-start coordinate ascent with projected line searches plus a Newton
polish, and exists to verify those claims rather than to be fast.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import (ChannelVector, ConfigError, NoiseProfile, ReceiverDesign,
                    TransmitConfig, validate)
from .mi_closed import (CD_DEGENERATE, SPLITTING_OPTIMAL, _mi_bits,
                        combined_noise_term, splitting_beats_cd)

#: Open-interval clearance used whenever a splitting ratio is searched
#: numerically; keeps clear of the poles at 0 and 1.
RHO_EPS = 1e-6

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class CheckFailedError(RuntimeError):
    """A stationarity / local-maximum check failed; carries the report."""

    def __init__(self, message, report):
        super().__init__(message)
        self.code = "check-failed"
        self.report = report


def golden_section_min(fn, lo: float, hi: float, tol: float = 1e-12,
                       max_iter: int = 200):
    """Golden-section minimization of a unimodal scalar function on [lo, hi].

    Returns ``(x, fn(x))`` at the midpoint of the final bracket.
    """
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


# ---------------------------------------------------------------------------
# Closed-form optimum
# ---------------------------------------------------------------------------

def _noise_discriminant(noise: NoiseProfile) -> float:
    s_a, s_cov, s_rec = noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq
    return (s_cov ** 2 * (s_a + s_cov - 2.0 * s_rec) * (s_cov - 2.0 * s_rec)
            * s_rec * (s_a + 2.0 * s_rec))


def rho_roots(noise: NoiseProfile) -> tuple[float, float]:
    """Both stationary points of the combined noise term in the splitting ratio.

    Only the first lies in (0, 1) when sigma_cov_sq > 4 * sigma_rec_sq; the
    second is returned so that this property can be checked.
    """
    s_a, s_cov, s_rec = noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq
    psi = _noise_discriminant(noise)
    base = s_cov * (s_cov - 2.0 * s_rec) * (s_a + 2.0 * s_rec)
    den = s_a * (s_cov - 4.0 * s_rec) * (s_cov - 2.0 * s_rec)
    root = np.sqrt(2.0 * psi)
    return (base - root) / den, (base + root) / den


def _fallback_rho(noise: NoiseProfile) -> float:
    x, _ = golden_section_min(lambda r: combined_noise_term(r, noise),
                              RHO_EPS, 1.0 - RHO_EPS)
    return x


def optimal_rho(noise: NoiseProfile) -> tuple[float, str]:
    """MI-maximizing splitting ratio, identical at every antenna.

    Returns ``(rho_star, regime)``: when sigma_cov_sq > 4 * sigma_rec_sq the
    interior closed-form root wins (``splitting-optimal``); otherwise the
    all-CD receiver is optimal and ``rho_star`` is 1 (``cd-degenerate``).
    When the closed-form denominator is numerically degenerate (near the
    regime boundary, or sigma_a_sq = 0) the ratio is found by golden-section
    minimization of the combined noise term instead.
    """
    sig = (noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq)
    if not all(np.isfinite(sig)) or noise.sigma_a_sq < 0 \
            or noise.sigma_cov_sq <= 0 or noise.sigma_rec_sq <= 0:
        raise ConfigError("invalid-noise", f"invalid noise powers {sig}")
    if not splitting_beats_cd(noise):
        return 1.0, CD_DEGENERATE
    s_a, s_cov, s_rec = sig
    den = s_a * (s_cov - 4.0 * s_rec) * (s_cov - 2.0 * s_rec)
    if abs(den) <= 1e-12 * s_cov ** 3:
        return _fallback_rho(noise), SPLITTING_OPTIMAL
    upsilon, _ = rho_roots(noise)
    if not (0.0 < upsilon < 1.0):
        warnings.warn(f"closed-form splitting ratio {upsilon} outside (0, 1); "
                      "falling back to numerical minimization")
        return _fallback_rho(noise), SPLITTING_OPTIMAL
    return float(upsilon), SPLITTING_OPTIMAL


def optimal_weights(channel: ChannelVector, c_alpha: float = 1.0,
                    c_beta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Optimal combining weights: proportional to the squared channel magnitude
    in both branches (any positive constants give the same MI)."""
    if c_alpha <= 0 or c_beta <= 0:
        raise ConfigError("zero-weight-sum", "weight constants must be > 0")
    mags_sq = channel.magnitudes ** 2
    return c_alpha * mags_sq, c_beta * mags_sq


def egc_weights(k: int) -> np.ndarray:
    """Equal-gain combining: uniform weights 1/K."""
    if k < 1:
        raise ConfigError("dimension-mismatch", "need at least one antenna")
    return np.full(k, 1.0 / k)


def mrc_weights(channel: ChannelVector) -> np.ndarray:
    """Magnitude-proportional combining (the classic MRC rule)."""
    return channel.magnitudes.copy()


@dataclass
class OptimalDesign:
    """Closed-form optimal design for a given channel and noise profile.

    ``upsilon`` is the interior root used for ``rho_star`` and is None in the
    cd-degenerate regime.  Weights are normalized to sum to one
    (``c_alpha = c_beta = 1 / sum(|h|^2)``) so equality assertions against
    other designs are well-posed; MI is invariant to the normalization.
    """

    rho_star: float
    upsilon: float | None
    psi: float
    alpha_star: np.ndarray
    beta_star: np.ndarray
    regime: str
    c_alpha: float
    c_beta: float


def optimal_design(channel: ChannelVector, noise: NoiseProfile) -> OptimalDesign:
    """Bundle the closed-form optimal ratio and weights for ``channel``/``noise``."""
    rho_star, regime = optimal_rho(noise)
    c = 1.0 / float(np.sum(channel.magnitudes ** 2))
    alpha_star, beta_star = optimal_weights(channel, c, c)
    return OptimalDesign(rho_star=rho_star,
                         upsilon=rho_star if regime == SPLITTING_OPTIMAL else None,
                         psi=_noise_discriminant(noise),
                         alpha_star=alpha_star, beta_star=beta_star,
                         regime=regime, c_alpha=c, c_beta=c)


def as_receiver_design(opt: OptimalDesign, k: int) -> ReceiverDesign:
    """Materialize an OptimalDesign as a sampler-ready ReceiverDesign."""
    if opt.regime == CD_DEGENERATE:
        return ReceiverDesign.cd_only(opt.alpha_star)
    return ReceiverDesign.splitting(np.full(k, opt.rho_star),
                                    opt.alpha_star, opt.beta_star)


# ---------------------------------------------------------------------------
# Numeric optimization oracle
# ---------------------------------------------------------------------------

def _sum_zero_basis(k: int) -> np.ndarray:
    """Orthonormal basis (k, k-1) of the zero-sum subspace."""
    if k == 1:
        return np.zeros((1, 0))
    _, _, vh = np.linalg.svd(np.ones((1, k)))
    return vh[1:].T


@dataclass
class NumericOptimum:
    """Best design found by :func:`numeric_optimize`.

    ``converged`` is False when the final gradient check did not reach the
    requested tolerance; the best point found is still reported.
    """

    design: ReceiverDesign
    mi_bits: float
    converged: bool
    grad_max_abs: float


class _Objective:
    """MI as a function of (rho, alpha, beta) with weights on the unit simplex."""

    def __init__(self, mags, noise, power, shared_rho):
        self.mags = mags
        self.noise = noise
        self.power = power
        self.shared_rho = shared_rho
        self.k = len(mags)

    def value(self, rho, alpha, beta) -> float:
        if np.any(rho <= 0.0) or np.any(rho >= 1.0) or np.any(alpha < 0.0) \
                or np.any(beta < 0.0) or alpha.sum() <= 0 or beta.sum() <= 0:
            return -np.inf
        return _mi_bits(self.mags, self.power, self.noise, rho, alpha, beta)


def _bracketed_min(fn, lo: float, hi: float, n_grid: int = 25, tol: float = 1e-12):
    """Coarse grid scan to bracket the global minimum of a possibly multimodal
    slice, then golden-section refinement inside the bracket."""
    xs = np.linspace(lo, hi, n_grid)
    vals = [fn(x) for x in xs]
    i = int(np.argmin(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n_grid - 1)]
    return golden_section_min(fn, a, b, tol=tol)


def _weight_slice(obj, rho, alpha, beta, which, i):
    """Globally bracketed search over one weight's share of its vector's sum.

    The slice variable is u = w_i / (w_i + sum of the others): a projected
    line through the weight simplex that covers the whole face u in [0, 1),
    so a weight parked on the boundary can re-enter the interior.
    """
    base = alpha if which == "alpha" else beta
    rest = base.sum() - base[i]
    if rest <= 0.0:
        return base

    def fn(u):
        cand = base.copy()
        cand[i] = u * rest / (1.0 - u)
        if which == "alpha":
            return -obj.value(rho, cand, beta)
        return -obj.value(rho, alpha, cand)

    u, _ = _bracketed_min(fn, 0.0, 1.0 - 1e-7, n_grid=33)
    cand = base.copy()
    cand[i] = u * rest / (1.0 - u)
    return cand / cand.sum()


def _ascend(obj: _Objective, rho, alpha, beta, max_iter=80, f_tol=1e-10):
    """Block coordinate ascent with bracketed projected line searches: each
    splitting ratio over its full interval, each weight over its full share
    of the simplex."""
    f = obj.value(rho, alpha, beta)
    for _ in range(max_iter):
        f_prev = f
        if obj.shared_rho:
            def fn(r):
                return -obj.value(np.full(obj.k, r), alpha, beta)
            r, _ = _bracketed_min(fn, RHO_EPS, 1.0 - RHO_EPS)
            rho = np.full(obj.k, r)
        else:
            for i in range(obj.k):
                def fn(r, i=i):
                    cand = rho.copy(); cand[i] = r
                    return -obj.value(cand, alpha, beta)
                rho[i], _ = _bracketed_min(fn, RHO_EPS, 1.0 - RHO_EPS)
        for i in range(obj.k):
            alpha = _weight_slice(obj, rho, alpha, beta, "alpha", i)
        for i in range(obj.k):
            beta = _weight_slice(obj, rho, alpha, beta, "beta", i)
        f = obj.value(rho, alpha, beta)
        if f - f_prev < f_tol:
            break
    return rho, alpha, beta, f


def _pack(obj, rho, alpha, beta, basis):
    blocks = [np.array([rho[0]]) if obj.shared_rho else rho]
    blocks += [basis.T @ alpha, basis.T @ beta]
    return np.concatenate(blocks), (rho.copy(), alpha.copy(), beta.copy())


def _unpack(obj, theta, origin, basis):
    rho0, alpha0, beta0 = origin
    n_rho = 1 if obj.shared_rho else obj.k
    m = basis.shape[1]
    d_rho = theta[:n_rho]
    rho = np.full(obj.k, rho0[0] + d_rho[0]) if obj.shared_rho else rho0 + d_rho
    alpha = alpha0 + basis @ theta[n_rho:n_rho + m]
    beta = beta0 + basis @ theta[n_rho + m:]
    return rho, alpha, beta


def _quotient_gradient(fn, theta, h=1e-6):
    grad = np.empty(theta.size)
    for i in range(theta.size):
        e = np.zeros_like(theta); e[i] = h
        grad[i] = (fn(theta + e) - fn(theta - e)) / (2 * h)
    return grad


def _newton_polish(obj, rho, alpha, beta, iters=4, h=1e-5):
    """Finite-difference Newton steps in the scale-quotiented coordinates."""
    basis = _sum_zero_basis(obj.k)
    theta0, origin = _pack(obj, rho, alpha, beta, basis)
    theta = np.zeros_like(theta0)

    def fn(t):
        return obj.value(*_unpack(obj, t, origin, basis))

    f = fn(theta)
    n = theta.size
    for _ in range(iters):
        grad = _quotient_gradient(fn, theta, h=1e-6)
        hess = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                ei = np.zeros(n); ei[i] = h
                ej = np.zeros(n); ej[j] = h
                hess[i, j] = hess[j, i] = (fn(theta + ei + ej) - fn(theta + ei - ej)
                                           - fn(theta - ei + ej) + fn(theta - ei - ej)) / (4 * h * h)
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        for _ in range(12):
            f_new = fn(theta + scale * step)
            if f_new > f:
                theta = theta + scale * step
                f = f_new
                break
            scale *= 0.5
        else:
            break
    rho, alpha, beta = _unpack(obj, theta, origin, basis)
    alpha = np.maximum(alpha, 0.0); alpha /= alpha.sum()
    beta = np.maximum(beta, 0.0); beta /= beta.sum()
    return rho, alpha, beta, obj.value(rho, alpha, beta)


def _quotient_grad_at(obj, rho, alpha, beta, h=1e-6):
    basis = _sum_zero_basis(obj.k)
    theta0, origin = _pack(obj, rho, alpha, beta, basis)

    def fn(t):
        return obj.value(*_unpack(obj, t, origin, basis))
    return _quotient_gradient(fn, np.zeros_like(theta0), h=h)


def numeric_optimize(channel: ChannelVector, noise: NoiseProfile,
                     tx: TransmitConfig, restarts: int = 6,
                     tolerance: float = 1e-6, shared_rho: bool = False,
                     seed: int = 0) -> NumericOptimum:
    """Search for the MI-maximizing splitting design, independently of the
    closed-form solution.

    Weights are constrained to the unit simplex (MI is scale invariant, so
    this only removes the null directions).  ``restarts`` deterministic
    starting points are tried: one equal-weight start plus random draws
    seeded from ``seed``.  The best candidate is Newton-polished and its
    quotient-space gradient is checked against ``tolerance`` (bits per unit);
    failing that check returns the best point with ``converged=False``.
    """
    config = validate(channel, noise,
                      ReceiverDesign.splitting(np.full(channel.n_antennas, 0.5),
                                               egc_weights(channel.n_antennas),
                                               egc_weights(channel.n_antennas)), tx)
    obj = _Objective(config.channel.magnitudes, noise, tx.power, shared_rho)
    k = obj.k

    candidates = []
    for r in range(max(1, restarts)):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), r)))
        if r == 0:
            rho = np.full(k, 0.5)
            alpha = egc_weights(k)
            beta = egc_weights(k)
        else:
            rho = np.full(k, rng.uniform(0.05, 0.95)) if shared_rho \
                else rng.uniform(0.05, 0.95, size=k)
            alpha = rng.exponential(size=k); alpha /= alpha.sum()
            beta = rng.exponential(size=k); beta /= beta.sum()
        rho, alpha, beta, f = _ascend(obj, rho, alpha, beta)
        candidates.append((f, r, rho, alpha, beta))

    # Best MI wins; near-ties resolved toward the smallest deviation of rho
    # from the closed-form ratio (diagnostic convenience only).
    best_f = max(c[0] for c in candidates)
    rho_cf, _ = optimal_rho(noise)
    near = [c for c in candidates if c[0] >= best_f - 1e-12]
    near.sort(key=lambda c: (np.max(np.abs(c[2] - rho_cf)), c[1]))
    _, _, rho, alpha, beta = near[0]

    rho, alpha, beta, f = _newton_polish(obj, rho, alpha, beta)
    grad = _quotient_grad_at(obj, rho, alpha, beta)
    grad_max = float(np.max(np.abs(grad))) if grad.size else 0.0
    design = ReceiverDesign.splitting(rho, alpha, beta)
    return NumericOptimum(design=design, mi_bits=float(f),
                          converged=bool(grad_max <= tolerance),
                          grad_max_abs=grad_max)


# ---------------------------------------------------------------------------
# Stationarity / local-maximum verification
# ---------------------------------------------------------------------------

@dataclass
class StationarityReport:
    """Outcome of the local-optimum verification at a candidate design."""

    grad_max_abs: float
    n_directions: int
    n_decreasing: int
    scale_shift_bits: float
    worst_direction: np.ndarray | None
    step: float


def stationarity_check(design: ReceiverDesign, channel: ChannelVector,
                       noise: NoiseProfile, tx: TransmitConfig,
                       step: float = 1e-4, n_directions: int = 100,
                       seed: int = 0, grad_tol: float = 1e-3) -> StationarityReport:
    """Verify that ``design`` is a stationary local maximum of the closed-form MI.

    Computes the central finite-difference gradient in the scale-quotiented
    parameterization (weights summing to one) and probes ``n_directions``
    random perturbations of norm ``step``, orthogonal to the two scaling
    null-directions, each of which must strictly decrease the MI.  The
    gradient step is capped at 1e-4 so large probe steps do not degrade the
    finite-difference accuracy.

    Raises
    ------
    CheckFailedError
        If the gradient exceeds ``grad_tol`` or some perturbation does not
        decrease the MI; the report (including the offending direction) is
        attached to the exception.
    """
    config = validate(channel, noise, design, tx)
    if config.mode != "splitting":
        raise ConfigError("boundary-rho", "stationarity check needs a splitting design")
    obj = _Objective(config.channel.magnitudes, noise, tx.power, shared_rho=False)
    k = obj.k
    alpha = design.alpha / design.alpha.sum()
    beta = design.beta / design.beta.sum()
    rho = design.rho.astype(float)
    f0 = obj.value(rho, alpha, beta)

    grad = _quotient_grad_at(obj, rho, alpha, beta, h=min(step, 1e-4))
    grad_max = float(np.max(np.abs(grad))) if grad.size else 0.0

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 17)))
    a_hat = alpha / np.linalg.norm(alpha)
    b_hat = beta / np.linalg.norm(beta)
    n_dec = 0
    worst = None
    worst_gap = -np.inf
    for _ in range(n_directions):
        for _attempt in range(100):
            v = rng.standard_normal(3 * k)
            v_rho, v_a, v_b = v[:k], v[k:2 * k], v[2 * k:]
            v_a = v_a - (v_a @ a_hat) * a_hat
            v_b = v_b - (v_b @ b_hat) * b_hat
            vec = np.concatenate([v_rho, v_a, v_b])
            norm = np.linalg.norm(vec)
            if norm < 1e-12:
                continue
            vec *= step / norm
            cand = obj.value(rho + vec[:k], alpha + vec[k:2 * k], beta + vec[2 * k:])
            if np.isfinite(cand):
                break
        gap = cand - f0
        if gap < 0:
            n_dec += 1
        if gap > worst_gap:
            worst_gap = gap
            worst = vec if gap >= 0 else None

    scale_shift = abs(obj.value(rho, 1.01 * alpha, beta) - f0)
    report = StationarityReport(grad_max_abs=grad_max, n_directions=n_directions,
                                n_decreasing=n_dec, scale_shift_bits=float(scale_shift),
                                worst_direction=worst, step=step)
    if grad_max > grad_tol:
        raise CheckFailedError(
            f"gradient {grad_max:.3e} bits/unit exceeds {grad_tol:.1e}", report)
    if n_dec < n_directions:
        raise CheckFailedError(
            f"{n_directions - n_dec} perturbations failed to decrease the MI", report)
    return report
