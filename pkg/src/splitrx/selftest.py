"""Fast self-check suite: closed-form results, invariances, design properties.

Each check prints one PASS/FAIL line.  The Monte Carlo calibration checks are
too slow for a quick self-test and live in the package's test suite instead.
"""

from __future__ import annotations

import numpy as np

from .model import ChannelVector, NoiseProfile, ReceiverDesign, TransmitConfig
from .mi_closed import (aux_quantities, combined_noise_term, gain_asymptotic,
                        gain_finite, mi_approx, mi_cd, mi_egc, mi_max, mi_mrc)
from .mi_mc import estimate_entropy_histogram
from .optimizer import (golden_section_min, optimal_rho, optimal_weights,
                        stationarity_check, CheckFailedError)
from .sweep import DEFAULT_NOISE, figure


def _check_optimal_rho():
    rho, regime = optimal_rho(DEFAULT_NOISE)
    golden, _ = golden_section_min(lambda r: combined_noise_term(r, DEFAULT_NOISE),
                                   1e-6, 1.0 - 1e-6)
    ok = (abs(rho - 0.5605) <= 1e-3 and abs(rho - golden) <= 1e-6
          and regime == "splitting-optimal")
    return ok, f"rho*={rho:.6f}, golden-section argmin={golden:.6f}"


def _check_peak():
    table = figure("fig3")
    mi = table.column("closed_form")
    best = int(np.argmax(mi))
    r1, r2 = table.rows[best][0], table.rows[best][1]
    peak = mi[best]
    ok = (abs(peak - 14.96) <= 0.05 and abs(r1 - 0.56) <= 0.01
          and abs(r2 - 0.56) <= 0.01)
    return ok, f"peak {peak:.4f} bits at rho=({r1:.2f}, {r2:.2f})"


def _check_antenna_gap():
    channel = ChannelVector(np.ones(10))
    tx = TransmitConfig(100.0)
    rho, _ = optimal_rho(DEFAULT_NOISE)
    best = mi_max(channel, DEFAULT_NOISE, tx, rho).value
    cd = mi_cd(channel, DEFAULT_NOISE, tx).value
    gap = best - cd
    rel = gap / cd
    ok = abs(gap - 1.69) <= 0.02 and abs(rel - 0.17) <= 0.01
    return ok, f"gap {gap:.4f} bits ({100 * rel:.1f}%)"


def _check_ordering():
    rng = np.random.default_rng(2024)
    rho, _ = optimal_rho(DEFAULT_NOISE)
    tx = TransmitConfig(100.0)
    for _ in range(1000):
        k = rng.integers(1, 7)
        channel = ChannelVector(rng.uniform(0.2, 4.0, size=k))
        egc = mi_egc(channel, DEFAULT_NOISE, tx, rho).value
        mrc = mi_mrc(channel, DEFAULT_NOISE, tx, rho).value
        best = mi_max(channel, DEFAULT_NOISE, tx, rho).value
        if not (egc <= mrc + 1e-12 and mrc <= best + 1e-12):
            return False, f"ordering violated for gains {channel.magnitudes}"
    return True, "egc <= mrc <= optimal on 1000 random channels"


def _check_gain_regimes():
    rho, _ = optimal_rho(DEFAULT_NOISE)
    asym = gain_asymptotic(DEFAULT_NOISE, rho)
    if abs(asym.gain_bits - 1.69) > 0.01:
        return False, f"asymptotic gain {asym.gain_bits:.4f}"
    quiet = NoiseProfile(sigma_a_sq=0.01, sigma_cov_sq=1.0, sigma_rec_sq=0.3)
    if gain_asymptotic(quiet, 1.0).gain_bits != 0.0:
        return False, "gain not zero in the cd-degenerate regime"
    gains = [gain_finite(ChannelVector(np.ones(k)), DEFAULT_NOISE,
                         TransmitConfig(1e4)).gain_bits for k in (1, 2, 4, 8)]
    if max(abs(g - asym.gain_bits) for g in gains) > 0.01:
        return False, f"finite gains {gains} vs asymptote {asym.gain_bits:.4f}"
    return True, f"asymptote {asym.gain_bits:.4f} bits, K-independent at P=1e4"


def _check_invariances():
    channel = ChannelVector([1.0, 3.0])
    tx = TransmitConfig(1000.0)
    noise = DEFAULT_NOISE
    design = ReceiverDesign.splitting([0.56, 0.56], [0.1, 0.9], [0.1, 0.9])
    base = mi_approx(channel, noise, design, tx).value

    scaled = ReceiverDesign.splitting([0.56, 0.56], [0.3, 2.7], [0.05, 0.45])
    if abs(mi_approx(channel, noise, scaled, tx).value - base) > 1e-9:
        return False, "weight-scale invariance broken"
    rotated = ChannelVector([1.0, 3.0], phases=[1.1, -2.3])
    if abs(mi_approx(rotated, noise, design, tx).value - base) > 1e-9:
        return False, "phase invariance broken"
    perm = ChannelVector([3.0, 1.0])
    pdesign = ReceiverDesign.splitting([0.56, 0.56], [0.9, 0.1], [0.9, 0.1])
    if abs(mi_approx(perm, noise, pdesign, tx).value - base) > 1e-9:
        return False, "permutation invariance broken"
    q = aux_quantities(channel, noise, design, tx)
    lhs = 2.0 * q.c_prime ** 2 * noise.sigma_rec_sq
    rhs = q.c ** 2 * noise.sigma_cov_sq
    if abs(lhs - rhs) > 1e-12 * abs(rhs):
        return False, "branch noise-floor identity broken"
    return True, "scale/phase/permutation invariance and noise-floor identity hold"


def _check_stationarity():
    channel = ChannelVector([1.0, 3.0])
    tx = TransmitConfig(1000.0)
    rho, _ = optimal_rho(DEFAULT_NOISE)
    alpha, beta = optimal_weights(channel, 0.1, 0.1)
    design = ReceiverDesign.splitting(np.full(2, rho), alpha, beta)
    try:
        report = stationarity_check(design, channel, DEFAULT_NOISE, tx,
                                    step=1e-2, n_directions=100)
    except CheckFailedError as exc:
        return False, str(exc)
    return True, (f"gradient {report.grad_max_abs:.2e} bits/unit, "
                  f"{report.n_decreasing}/{report.n_directions} perturbations decrease")


def _check_entropy_estimator():
    rng = np.random.default_rng(11)
    h = estimate_entropy_histogram(rng.standard_normal(200_000), 256)
    expected = 0.5 * np.log2(2 * np.pi * np.e)
    ok = abs(h - expected) <= 0.05
    return ok, f"1-D Gaussian entropy {h:.4f} vs {expected:.4f}"


CHECKS = [
    ("optimal-splitting-ratio", _check_optimal_rho),
    ("two-antenna-peak", _check_peak),
    ("antenna-gap", _check_antenna_gap),
    ("combining-ordering", _check_ordering),
    ("gain-regimes", _check_gain_regimes),
    ("invariances", _check_invariances),
    ("stationarity", _check_stationarity),
    ("entropy-estimator", _check_entropy_estimator),
]


def run_selftest(stream=None) -> int:
    """Run all checks, print one PASS/FAIL line each; returns a shell exit code."""
    import sys
    stream = stream or sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        status = "PASS" if ok else "FAIL"
        stream.write(f"{status} {name}: {detail}\n")
        failures += 0 if ok else 1
    stream.write(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed\n")
    return 0 if failures == 0 else 1
