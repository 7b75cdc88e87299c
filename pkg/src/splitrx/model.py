"""Domain types, validation, and exact sampling for the multi-antenna ED-CD
splitting receiver.

A K-antenna splitting receiver divides the RF signal at each antenna between a
coherent-detection (CD) chain and an envelope-detection (ED) chain with power
fraction ``rho_k`` going to CD.  After per-branch scaling, the CD outputs are
linearly combined with weights ``alpha_k`` into a complex observation ``r1``
and the ED outputs with weights ``beta_k`` into a real observation ``r2``.

The sampler here is exact: it draws every per-antenna and per-branch noise
term individually, with no high-SNR linearization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPLITTING = "splitting"
CD_ONLY = "cd-only"
ED_ONLY = "ed-only"

_MODES = (SPLITTING, CD_ONLY, ED_ONLY)


class ConfigError(ValueError):
    """A receiver configuration violated an invariant.

    ``code`` is a stable machine-readable identifier, e.g. ``dimension-mismatch``,
    ``boundary-rho``, ``zero-gain-antenna``, ``nonpositive-power``,
    ``zero-weight-sum``, ``negative-weight``, ``invalid-noise``, ``rho-out-of-range``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ConfigError("dimension-mismatch", f"{name} must be one-dimensional")
    return arr


@dataclass
class ChannelVector:
    """Per-antenna channel coefficients, stored as magnitude and phase.

    Parameters
    ----------
    magnitudes : array_like
        Linear channel gains, one per antenna, all strictly positive.
    phases : array_like, optional
        Phases in radians; defaults to zero for every antenna.  The joint
        distribution of the combined observations does not depend on them
        (each branch is de-rotated before combining), so they matter only
        when inspecting raw coefficients.
    """

    magnitudes: np.ndarray
    phases: np.ndarray | None = None

    def __post_init__(self):
        self.magnitudes = _as_vector(self.magnitudes, "magnitudes")
        if self.phases is None:
            self.phases = np.zeros_like(self.magnitudes)
        else:
            self.phases = _as_vector(self.phases, "phases")

    @property
    def n_antennas(self) -> int:
        return self.magnitudes.size

    @property
    def coefficients(self) -> np.ndarray:
        """Complex channel coefficients magnitude * exp(j * phase)."""
        return self.magnitudes * np.exp(1j * self.phases)


@dataclass
class NoiseProfile:
    """The three receiver noise powers (all linear power units).

    ``sigma_a_sq`` is the antenna noise entering before the splitter and hence
    both branches; ``sigma_cov_sq`` the CD down-conversion noise; ``sigma_rec_sq``
    the ED rectifier noise.
    """

    sigma_a_sq: float
    sigma_cov_sq: float
    sigma_rec_sq: float


@dataclass
class TransmitConfig:
    """Average transmit power (linear units)."""

    power: float


@dataclass
class ReceiverDesign:
    """Splitting ratios and combining weights.

    ``mode`` selects the receiver architecture:

    * ``"splitting"`` -- every antenna feeds both branches; ``rho`` holds the
      per-antenna CD power fractions, each strictly inside (0, 1).  A ratio of
      exactly 0 or 1 would starve one branch and make its scaled noise term
      blow up, so the degenerate receivers get dedicated modes instead.
    * ``"cd-only"`` -- all power to CD (``rho`` implicitly 1); only ``alpha``
      is used and ``r2`` is not produced.
    * ``"ed-only"`` -- all power to ED (``rho`` implicitly 0); only ``beta``
      is used and ``r1`` is not produced.
    """

    rho: np.ndarray | None = None
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    mode: str = SPLITTING

    def __post_init__(self):
        if self.rho is not None:
            self.rho = _as_vector(self.rho, "rho")
        if self.alpha is not None:
            self.alpha = _as_vector(self.alpha, "alpha")
        if self.beta is not None:
            self.beta = _as_vector(self.beta, "beta")

    @classmethod
    def splitting(cls, rho, alpha, beta) -> "ReceiverDesign":
        return cls(rho=rho, alpha=alpha, beta=beta, mode=SPLITTING)

    @classmethod
    def cd_only(cls, alpha) -> "ReceiverDesign":
        return cls(rho=None, alpha=alpha, beta=None, mode=CD_ONLY)

    @classmethod
    def ed_only(cls, beta) -> "ReceiverDesign":
        return cls(rho=None, alpha=None, beta=beta, mode=ED_ONLY)


@dataclass
class Observation:
    """One channel use: transmitted symbol and combined receiver outputs.

    ``r1`` is None in ED-only mode, ``r2`` is None in CD-only mode.
    """

    x: complex
    r1: complex | None
    r2: float | None


@dataclass
class ReceiverConfig:
    """A validated bundle of channel, noise, design and transmit settings.

    Construct through :func:`validate`; the sampler and the estimators assume
    the invariants have been checked.
    """

    channel: ChannelVector
    noise: NoiseProfile
    design: ReceiverDesign
    tx: TransmitConfig

    @property
    def n_antennas(self) -> int:
        return self.channel.n_antennas

    @property
    def mode(self) -> str:
        return self.design.mode

    @property
    def observation_dim(self) -> int:
        """Real dimension of the observation: 3 splitting, 2 CD-only, 1 ED-only."""
        return {SPLITTING: 3, CD_ONLY: 2, ED_ONLY: 1}[self.design.mode]


def _check_finite(arr, code: str, name: str):
    if not np.all(np.isfinite(arr)):
        raise ConfigError(code, f"{name} must be finite, got {arr}")


def _check_weights(w: np.ndarray, name: str):
    _check_finite(w, "negative-weight", name)
    if np.any(w < 0):
        raise ConfigError("negative-weight", f"all {name} weights must be >= 0")
    if w.sum() <= 0:
        raise ConfigError("zero-weight-sum", f"{name} weights must not sum to zero")


def validate(channel: ChannelVector, noise: NoiseProfile, design: ReceiverDesign,
             tx: TransmitConfig) -> ReceiverConfig:
    """Check every configuration invariant and return the validated bundle.

    Raises
    ------
    ConfigError
        With ``code`` identifying the violated invariant: ``dimension-mismatch``,
        ``boundary-rho``, ``rho-out-of-range``, ``zero-gain-antenna``,
        ``nonpositive-power``, ``zero-weight-sum``, ``negative-weight`` or
        ``invalid-noise``.
    """
    k = channel.n_antennas
    if k < 1:
        raise ConfigError("dimension-mismatch", "need at least one antenna")
    if channel.phases.size != k:
        raise ConfigError("dimension-mismatch",
                          f"phases has length {channel.phases.size}, expected {k}")
    _check_finite(channel.magnitudes, "zero-gain-antenna", "channel magnitudes")
    _check_finite(channel.phases, "dimension-mismatch", "channel phases")
    if np.any(channel.magnitudes <= 0):
        # The branch scalings divide by the gain, so fail loudly instead of
        # silently dropping a dead antenna.
        raise ConfigError("zero-gain-antenna", "channel magnitudes must be > 0")

    sig = np.array([noise.sigma_a_sq, noise.sigma_cov_sq, noise.sigma_rec_sq], float)
    _check_finite(sig, "invalid-noise", "noise powers")
    if noise.sigma_a_sq < 0 or noise.sigma_cov_sq <= 0 or noise.sigma_rec_sq <= 0:
        raise ConfigError("invalid-noise",
                          "need sigma_a_sq >= 0, sigma_cov_sq > 0, sigma_rec_sq > 0")

    if not np.isfinite(tx.power) or tx.power <= 0:
        raise ConfigError("nonpositive-power", f"transmit power must be > 0, got {tx.power}")

    if design.mode not in _MODES:
        raise ConfigError("dimension-mismatch", f"unknown mode {design.mode!r}")

    if design.mode == SPLITTING:
        if design.rho is None or design.alpha is None or design.beta is None:
            raise ConfigError("dimension-mismatch",
                              "splitting mode needs rho, alpha and beta")
        for name, arr in (("rho", design.rho), ("alpha", design.alpha), ("beta", design.beta)):
            if arr.size != k:
                raise ConfigError("dimension-mismatch",
                                  f"{name} has length {arr.size}, expected {k}")
        _check_finite(design.rho, "rho-out-of-range", "rho")
        if np.any((design.rho < 0) | (design.rho > 1)):
            raise ConfigError("rho-out-of-range", "splitting ratios must lie in [0, 1]")
        if np.any((design.rho == 0) | (design.rho == 1)):
            raise ConfigError("boundary-rho",
                              "per-antenna rho of exactly 0 or 1 starves one branch; "
                              "use the cd-only / ed-only modes for the degenerate receivers")
        _check_weights(design.alpha, "alpha")
        _check_weights(design.beta, "beta")
    elif design.mode == CD_ONLY:
        if design.alpha is None or design.alpha.size != k:
            raise ConfigError("dimension-mismatch", f"cd-only mode needs alpha of length {k}")
        _check_weights(design.alpha, "alpha")
    else:  # ED_ONLY
        if design.beta is None or design.beta.size != k:
            raise ConfigError("dimension-mismatch", f"ed-only mode needs beta of length {k}")
        _check_weights(design.beta, "beta")

    return ReceiverConfig(channel=channel, noise=noise, design=design, tx=tx)


# ---------------------------------------------------------------------------
# Random number plumbing
# ---------------------------------------------------------------------------

def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def worker_seed(master_seed: int, worker_index: int) -> np.random.SeedSequence:
    """Deterministic per-worker seed derived from (master seed, worker index)."""
    return np.random.SeedSequence((int(master_seed), int(worker_index)))


def sample_symbols(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw n circularly-symmetric complex Gaussian symbols, zero mean, unit variance."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_observations(config: ReceiverConfig, n: int, seed,
                        x: np.ndarray | None = None,
                        noise_form: str = "per-branch"):
    """Draw ``n`` channel uses and return ``(x, r1, r2)`` as arrays.

    Per antenna k the sampler draws the antenna noise W_k ~ CN(0, sigma_a_sq),
    the conversion noise Z_k ~ CN(0, sigma_cov_sq) and the rectifier noise
    N_k ~ N(0, sigma_rec_sq), all independent, then forms

        r1 = sum_k alpha_k * (x + W_k / (sqrt(P) |h_k|) + Z_k / (sqrt(rho_k P) |h_k|))
        r2 = sum_k beta_k  * (|x + W_k / (sqrt(P) |h_k|)| + N_k / (sqrt((1 - rho_k) P) |h_k|))

    CD-only mode uses rho_k = 1 and returns ``r2 = None``; ED-only mode uses
    rho_k = 0 and returns ``r1 = None``.

    Parameters
    ----------
    config : ReceiverConfig
        Validated configuration.
    n : int
        Number of channel uses.
    seed : int | SeedSequence | Generator
        Randomness source; identical seed and config give an identical stream.
    x : ndarray, optional
        Fixed transmitted symbols (broadcast to length ``n``).  When omitted,
        symbols are drawn CN(0, 1).
    noise_form : {"per-branch", "combined"}
        ``per-branch`` draws one conversion/rectifier noise per antenna branch
        (the ground truth).  ``combined`` draws a single conversion noise and a
        single rectifier noise scaled to the equivalent combined variance; the
        two forms agree in distribution and the option exists so that the
        equivalence can be tested.
    """
    rng = as_generator(seed)
    mags = config.channel.magnitudes
    k = config.n_antennas
    p = config.tx.power
    sqrt_p = np.sqrt(p)
    noise = config.noise
    design = config.design
    mode = design.mode
    if noise_form not in ("per-branch", "combined"):
        raise ValueError(f"unknown noise_form {noise_form!r}")

    if x is None:
        x = sample_symbols(rng, n)
    else:
        x = np.broadcast_to(np.asarray(x, complex), (n,)).copy()

    if mode == SPLITTING:
        rho = design.rho
        cd_scale = np.sqrt(rho * p) * mags
        ed_scale = np.sqrt((1.0 - rho) * p) * mags
        alpha, beta = design.alpha, design.beta
    elif mode == CD_ONLY:
        rho = np.ones(k)
        cd_scale = sqrt_p * mags
        ed_scale = None
        alpha, beta = design.alpha, None
    else:
        rho = np.zeros(k)
        cd_scale = None
        ed_scale = sqrt_p * mags
        alpha, beta = None, design.beta

    sigma_a = np.sqrt(noise.sigma_a_sq / 2.0)
    sigma_z = np.sqrt(noise.sigma_cov_sq / 2.0)
    sigma_n = np.sqrt(noise.sigma_rec_sq)

    r1 = np.zeros(n, complex) if mode != ED_ONLY else None
    r2 = np.zeros(n, float) if mode != CD_ONLY else None

    for i in range(k):
        w = sigma_a * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        signal_i = x + w / (sqrt_p * mags[i])
        if r1 is not None:
            r1 += alpha[i] * signal_i
            if noise_form == "per-branch":
                z = sigma_z * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
                r1 += alpha[i] * z / cd_scale[i]
        if r2 is not None:
            r2 += beta[i] * np.abs(signal_i)
            if noise_form == "per-branch":
                r2 += beta[i] * sigma_n * rng.standard_normal(n) / ed_scale[i]

    if noise_form == "combined":
        if r1 is not None:
            z = sigma_z * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
            r1 += np.sqrt(np.sum(alpha ** 2 / (rho * p * mags ** 2))) * z
        if r2 is not None:
            nz = sigma_n * rng.standard_normal(n)
            r2 += np.sqrt(np.sum(beta ** 2 / ((1.0 - rho) * p * mags ** 2))) * nz

    return x, r1, r2


def sample_observation(config: ReceiverConfig, seed) -> Observation:
    """Draw a single channel use (symbol sampled CN(0, 1))."""
    x, r1, r2 = sample_observations(config, 1, seed)
    return Observation(x=complex(x[0]),
                       r1=None if r1 is None else complex(r1[0]),
                       r2=None if r2 is None else float(r2[0]))


def sample_observation_given_x(config: ReceiverConfig, x: complex, seed) -> Observation:
    """Draw a single channel use with the transmitted symbol held at ``x``."""
    xs, r1, r2 = sample_observations(config, 1, seed, x=np.array([x], complex))
    return Observation(x=complex(xs[0]),
                       r1=None if r1 is None else complex(r1[0]),
                       r2=None if r2 is None else float(r2[0]))


def observation_matrix(config: ReceiverConfig, n: int, seed,
                       x: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Sample and stack observations as an (n, d) real matrix for estimators.

    Returns ``(x, pts)`` where the columns of ``pts`` are (Re r1, Im r1, r2)
    in splitting mode, (Re r1, Im r1) in CD-only mode and (r2,) in ED-only mode.
    """
    xs, r1, r2 = sample_observations(config, n, seed, x=x)
    mode = config.design.mode
    if mode == SPLITTING:
        pts = np.column_stack([r1.real, r1.imag, r2])
    elif mode == CD_ONLY:
        pts = np.column_stack([r1.real, r1.imag])
    else:
        pts = r2[:, None]
    return xs, pts
