"""Closed-form mutual-information expressions for the splitting receiver.

Everything here is the high-SNR analytical machinery: the three-term MI
approximation for an arbitrary splitting design, the CD-receiver benchmark,
the optimized / EGC / MRC receiver MI, and the MI gain of splitting over the
best conventional receiver.  All values are in bits; all logs are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (ChannelVector, ConfigError, NoiseProfile, ReceiverConfig,
                    ReceiverDesign, SPLITTING, TransmitConfig, validate)
from .mi_mc import MiEstimate


@dataclass
class AuxQuantities:
    """Derived scalars of the high-SNR MI approximation.

    ``a`` is the effective envelope-branch amplitude gain after rescaling both
    branch outputs to a common noise floor; ``b`` / ``b_prime`` the per-antenna
    antenna-noise couplings of the CD / ED branches; ``c`` / ``c_prime`` the
    combined conversion / rectifier noise amplitudes; ``gamma`` the ED-branch
    rescaling factor that equalizes the two processing-noise floors;
    ``a_prime`` the plain CD weight sum.
    """

    a: float
    b: np.ndarray
    c: float
    a_prime: float
    b_prime: np.ndarray
    c_prime: float
    gamma: float


def _splitting_config(channel, noise, design, tx) -> ReceiverConfig:
    config = validate(channel, noise, design, tx)
    if config.mode != SPLITTING:
        raise ConfigError("boundary-rho",
                          "closed-form splitting MI needs a splitting-mode design")
    return config


def _aux_scalars(mags: np.ndarray, p: float, noise: NoiseProfile,
                 rho: np.ndarray, alpha: np.ndarray, beta: np.ndarray):
    """Array-level core of :func:`aux_quantities` (no validation)."""
    a_prime = alpha.sum()
    # combined conversion / rectifier noise variances after CD-side rescaling
    cd_noise = np.sum(alpha ** 2 / (rho * p * mags ** 2))
    ed_noise = np.sum(beta ** 2 / ((1.0 - rho) * p * mags ** 2))

    c = np.sqrt(cd_noise) / a_prime
    gamma = (np.sqrt(cd_noise) * np.sqrt(noise.sigma_cov_sq)
             / (np.sqrt(2.0) * np.sqrt(ed_noise) * a_prime * np.sqrt(noise.sigma_rec_sq)))
    a = gamma * beta.sum()
    b = alpha / (a_prime * np.sqrt(p) * mags)
    b_prime = gamma * beta / (np.sqrt(p) * mags)
    c_prime = gamma * np.sqrt(ed_noise)
    return a, b, c, a_prime, b_prime, c_prime, gamma


def _mi_bits(mags: np.ndarray, p: float, noise: NoiseProfile,
             rho: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> float:
    """Array-level core of :func:`mi_approx` (no validation).

    The numeric optimizer calls this directly, so the closed form and the
    search oracle share a single formula implementation.
    """
    a, b, c, _, b_prime, _, _ = _aux_scalars(mags, p, noise, rho, alpha, beta)
    s_a = noise.sigma_a_sq
    s_cov = noise.sigma_cov_sq
    one_plus_a2 = 1.0 + a ** 2
    term1 = 0.5 * np.log2(one_plus_a2)
    term2 = 0.5 * np.log2(np.sum(b ** 2) * s_a + c ** 2 * s_cov)
    mixed = (b + b_prime * a) / np.sqrt(one_plus_a2)
    term3 = 0.5 * np.log2(np.sum(mixed ** 2) * s_a + c ** 2 * s_cov)
    return float(term1 - term2 - term3)


def aux_quantities(channel: ChannelVector, noise: NoiseProfile,
                   design: ReceiverDesign, tx: TransmitConfig) -> AuxQuantities:
    """Compute the derived scalars feeding :func:`mi_approx`.

    Satisfies the identity 2 * c_prime**2 * sigma_rec_sq == c**2 * sigma_cov_sq
    (the gamma rescaling is defined to equalize the branch noise floors).
    """
    config = _splitting_config(channel, noise, design, tx)
    a, b, c, a_prime, b_prime, c_prime, gamma = _aux_scalars(
        config.channel.magnitudes, config.tx.power, noise,
        config.design.rho, config.design.alpha, config.design.beta)
    return AuxQuantities(a=float(a), b=b, c=float(c), a_prime=float(a_prime),
                         b_prime=b_prime, c_prime=float(c_prime), gamma=float(gamma))


def mi_approx(channel: ChannelVector, noise: NoiseProfile,
              design: ReceiverDesign, tx: TransmitConfig) -> MiEstimate:
    """High-SNR closed-form MI of a splitting design, in bits.

    Accurate at moderate and high SNR; it is exact in neither the low-SNR
    regime nor at the splitting-ratio boundaries (those are rejected by
    validation).  Invariant under separate positive rescaling of the alpha
    and beta weight vectors and under any change of channel phases.
    """
    config = _splitting_config(channel, noise, design, tx)
    value = _mi_bits(config.channel.magnitudes, config.tx.power, noise,
                     config.design.rho, config.design.alpha, config.design.beta)
    return MiEstimate(value=value, std_error=0.0, method="closed-form")


def combined_noise_term(rho: float, noise: NoiseProfile) -> float:
    """Product of the two effective post-combining noise powers at ratio ``rho``.

    This single expression is shared by every optimized-receiver MI formula;
    it is evaluated in a factored rational form in which the 1/(1 - rho) poles
    cancel algebraically, so rho -> 1 is numerically stable and returns
    (sigma_a_sq + sigma_cov_sq)**2.
    """
    s_a, s_cov, s_rec = noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq
    num = (rho * s_a + s_cov) * ((rho - 1.0) * s_a * s_cov
                                 - 2.0 * rho * s_a * s_rec - 2.0 * s_cov * s_rec)
    den = rho * ((rho - 1.0) * s_cov - 2.0 * rho * s_rec)
    return num / den


def _check_rho_star(rho_star: float):
    if not (0.0 < rho_star <= 1.0):
        raise ConfigError("rho-out-of-range",
                          f"rho_star must lie in (0, 1], got {rho_star}")


def _closed(value: float) -> MiEstimate:
    return MiEstimate(value=float(value), std_error=0.0, method="closed-form")


def mi_cd(channel: ChannelVector, noise: NoiseProfile, tx: TransmitConfig) -> MiEstimate:
    """Exact MI of the conventional all-CD receiver, in bits."""
    snr = tx.power * np.sum(channel.magnitudes ** 2) / (noise.sigma_cov_sq + noise.sigma_a_sq)
    return _closed(np.log2(1.0 + snr))


def mi_max(channel: ChannelVector, noise: NoiseProfile, tx: TransmitConfig,
           rho_star: float) -> MiEstimate:
    """Maximum high-SNR MI of the splitting receiver at splitting ratio ``rho_star``.

    ``rho_star = 1`` denotes the degenerate all-CD optimum and delegates to
    :func:`mi_cd`; interior values use the optimal-combining closed form.
    """
    _check_rho_star(rho_star)
    if rho_star == 1.0:
        return mi_cd(channel, noise, tx)
    gain = np.log2(tx.power * np.sum(channel.magnitudes ** 2))
    return _closed(gain - 0.5 * np.log2(combined_noise_term(rho_star, noise)))


def mi_egc(channel: ChannelVector, noise: NoiseProfile, tx: TransmitConfig,
           rho_star: float) -> MiEstimate:
    """High-SNR MI when equal-gain combining is used in both branches."""
    _check_rho_star(rho_star)
    if rho_star == 1.0:
        return mi_cd(channel, noise, tx)
    k = channel.n_antennas
    gain = np.log2(tx.power * k ** 2 / np.sum(1.0 / channel.magnitudes ** 2))
    return _closed(gain - 0.5 * np.log2(combined_noise_term(rho_star, noise)))


def mi_mrc(channel: ChannelVector, noise: NoiseProfile, tx: TransmitConfig,
           rho_star: float) -> MiEstimate:
    """High-SNR MI when magnitude-proportional (MRC) combining is used."""
    _check_rho_star(rho_star)
    if rho_star == 1.0:
        return mi_cd(channel, noise, tx)
    k = channel.n_antennas
    gain = np.log2(tx.power * np.sum(channel.magnitudes) ** 2 / k)
    return _closed(gain - 0.5 * np.log2(combined_noise_term(rho_star, noise)))


SPLITTING_OPTIMAL = "splitting-optimal"
CD_DEGENERATE = "cd-degenerate"


@dataclass
class GainReport:
    """MI advantage of the optimized splitting receiver over the best
    conventional receiver, in bits.

    ``regime`` is ``splitting-optimal`` when an interior splitting ratio wins
    (sigma_cov_sq > 4 * sigma_rec_sq) and ``cd-degenerate`` when all-CD is
    already optimal, in which case the gain is zero.  ``asymptotic`` marks the
    infinite-power limit as opposed to a finite-power evaluation.
    """

    gain_bits: float
    regime: str
    asymptotic: bool


def splitting_beats_cd(noise: NoiseProfile) -> bool:
    """Whether an interior splitting ratio outperforms the all-CD receiver."""
    return noise.sigma_cov_sq > 4.0 * noise.sigma_rec_sq


def gain_asymptotic(noise: NoiseProfile, rho_star: float) -> GainReport:
    """Infinite-power MI gain of optimized splitting over the CD receiver.

    Depends only on the noise powers (not on the channel or antenna count).
    Zero whenever sigma_cov_sq <= 4 * sigma_rec_sq, where the splitting
    optimum degenerates to all-CD.
    """
    if not splitting_beats_cd(noise):
        return GainReport(gain_bits=0.0, regime=CD_DEGENERATE, asymptotic=True)
    _check_rho_star(rho_star)
    s_a, s_cov, s_rec = noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq
    r = rho_star
    num = r * ((1.0 - r) * s_cov + 2.0 * r * s_rec) * (s_a + s_cov) ** 2
    den = ((r * s_a + s_cov)
           * (2.0 * r * s_rec * s_a + (1.0 - r) * s_cov * s_a + 2.0 * s_cov * s_rec))
    return GainReport(gain_bits=float(0.5 * np.log2(num / den)),
                      regime=SPLITTING_OPTIMAL, asymptotic=True)


def gain_finite(channel: ChannelVector, noise: NoiseProfile, tx: TransmitConfig,
                rho_star: float | None = None,
                ed_benchmark: MiEstimate | None = None,
                mc_settings=None) -> GainReport:
    """Finite-power MI gain: optimized splitting minus the best conventional receiver.

    The CD benchmark has a closed form; the all-ED benchmark does not and is
    dropped by default (it loses to CD at moderate and high SNR).  Pass
    ``mc_settings`` to have it estimated by Monte Carlo with MRC weights, or
    supply a precomputed ``ed_benchmark`` estimate.
    """
    if rho_star is None:
        from .optimizer import optimal_rho
        rho_star, _ = optimal_rho(noise)
    if not splitting_beats_cd(noise):
        return GainReport(gain_bits=0.0, regime=CD_DEGENERATE, asymptotic=False)
    best = mi_max(channel, noise, tx, rho_star).value
    cd = mi_cd(channel, noise, tx).value
    if ed_benchmark is None and mc_settings is not None:
        from .mi_mc import estimate_mi
        ed_design = ReceiverDesign.ed_only(channel.magnitudes.copy())
        ed_config = validate(channel, noise, ed_design, tx)
        ed_benchmark = estimate_mi(ed_config, mc_settings)
    benchmark = cd if ed_benchmark is None else max(cd, ed_benchmark.value)
    return GainReport(gain_bits=float(best - benchmark),
                      regime=SPLITTING_OPTIMAL, asymptotic=False)
