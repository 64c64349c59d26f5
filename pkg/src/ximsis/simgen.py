"""Generators for the four benchmark survival designs.

Covariates are streamed row-wise (no p x p covariance matrix), latent
event times are drawn per design, and a Uniform(0, c) censoring bound is
calibrated once per scenario to hit a target censoring rate.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .survival import SurvivalResponse

__all__ = [
    "SimScenario",
    "GeneratedSample",
    "MODELS",
    "sample_covariates",
    "cox_time",
    "gen_cox",
    "transformation_h",
    "transformation_time",
    "gen_transformation",
    "gen_aft",
    "gen_nonlinear",
    "latent_times",
    "censoring_rate_for_bound",
    "calibrate_censoring",
    "calibrated_bound",
    "generate",
    "replication_seed_sequence",
    "preset",
    "PRESETS",
]

logger = logging.getLogger(__name__)

MODELS = ("cox", "transformation", "aft", "nonlinear")
COVARIANCES = ("ar1", "cs")

# smallest positive double; latent times below it are stored as this value
_TINY = np.nextafter(0.0, 1.0)

_DEFAULT_BETA = {
    "cox": (0.35, 0.35, 0.35, 0.35, 0.35),
    "transformation": (-1.0, -0.9, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.8, 1.0),
}
# covariates entering the AFT and nonlinear designs (0-based)
_FIXED_ACTIVE = (0, 1, 6)


@dataclass(frozen=True)
class SimScenario:
    """One simulation design.

    ``beta`` lists the leading coefficients (zero-padded to p) and is used
    by the ``cox`` and ``transformation`` models only. Indices are 0-based.
    """

    model: str
    n: int
    p: int
    covariance: str
    rho: float
    target_cr: float
    seed: int = 0
    beta: tuple = ()
    baseline_hazard: float = 0.5
    name: str = ""

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.covariance not in COVARIANCES:
            raise ValueError(f"unknown covariance {self.covariance!r}; expected one of {COVARIANCES}")
        if not 0.0 < self.target_cr < 1.0:
            raise ValueError("target censoring rate must lie strictly between 0 and 1")
        if self.n < 3 or self.p < 1:
            raise ValueError("need n >= 3 and p >= 1")
        _check_rho(self.covariance, self.rho)
        beta = tuple(float(b) for b in self.beta) or _DEFAULT_BETA.get(self.model, ())
        object.__setattr__(self, "beta", beta)
        if self.model in ("cox", "transformation") and len(beta) > self.p:
            raise ValueError("beta is longer than p")
        if self.model in ("aft", "nonlinear") and self.p < 7:
            raise ValueError(f"the {self.model} design needs p >= 7")

    @property
    def active_set(self) -> tuple[int, ...]:
        if self.model in ("cox", "transformation"):
            return tuple(i for i, b in enumerate(self.beta) if b != 0.0)
        return _FIXED_ACTIVE

    @property
    def latent_dim(self) -> int:
        """Number of leading covariates the latent time depends on."""
        if self.model in ("cox", "transformation"):
            return len(self.beta)
        return max(_FIXED_ACTIVE) + 1

    def beta_vector(self, p: int | None = None) -> np.ndarray:
        p = self.p if p is None else p
        out = np.zeros(p)
        out[: len(self.beta)] = self.beta
        return out


@dataclass(frozen=True)
class GeneratedSample:
    X: np.ndarray
    t_true: np.ndarray
    resp: SurvivalResponse
    c_upper: float
    censor: np.ndarray = field(repr=False, default=None)


def _check_rho(covariance: str, rho: float) -> None:
    if covariance == "ar1" and not -1.0 < rho < 1.0:
        raise ValueError("AR(1) correlation must lie in (-1, 1)")
    if covariance == "cs" and not 0.0 <= rho < 1.0:
        raise ValueError("compound-symmetry correlation must lie in [0, 1)")


def sample_covariates(n: int, p: int, covariance: str, rho: float, rng) -> np.ndarray:
    """Draw n rows from N_p(0, Sigma) with unit variances.

    ``ar1`` gives Sigma_ij = rho^|i-j| through the stationary recursion
    X_1 = Z_1, X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j. ``cs`` gives
    Sigma_ij = rho (i != j) through X_j = sqrt(rho) W + sqrt(1 - rho) Z_j.
    """
    _check_rho(covariance, rho)
    Z = rng.standard_normal((n, p))
    if covariance == "ar1":
        if rho == 0.0:
            return Z
        scale = np.sqrt(1.0 - rho * rho)
        Z[:, 0] /= scale
        return lfilter([scale], [1.0, -rho], Z, axis=1)
    W = rng.standard_normal((n, 1))
    return np.sqrt(rho) * W + np.sqrt(1.0 - rho) * Z


def _positive(t: np.ndarray) -> np.ndarray:
    return np.maximum(t, _TINY)


def cox_time(u, linear_predictor, h0: float = 0.5):
    """Inverse-transform draw -log(u) / (h0 * exp(x'beta)) for a constant baseline hazard."""
    u = np.asarray(u, dtype=np.float64)
    return -np.log(u) / (h0 * np.exp(linear_predictor))


def _open_uniform(rng, n: int) -> np.ndarray:
    u = rng.random(n)
    u[u == 0.0] = _TINY
    return u


def gen_cox(X, beta, h0: float, rng) -> np.ndarray:
    X = np.asarray(X)
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != X.shape[1]:
        raise ValueError("beta must have length p")
    return _positive(cox_time(_open_uniform(rng, X.shape[0]), X @ beta, h0))


def transformation_h(t):
    """H(t) = log(0.5 * (exp(2t) - 1))."""
    t = np.asarray(t, dtype=np.float64)
    return np.log(np.expm1(2.0 * t)) - np.log(2.0)


def transformation_time(h):
    """Inverse of :func:`transformation_h`: 0.5 * log(1 + 2 exp(h)), overflow-safe."""
    h = np.asarray(h, dtype=np.float64)
    return 0.5 * np.logaddexp(0.0, h + np.log(2.0))


def gen_transformation(X, beta, rng) -> np.ndarray:
    """T = H^{-1}(-x'beta + eps) with standard Cauchy eps."""
    X = np.asarray(X)
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != X.shape[1]:
        raise ValueError("beta must have length p")
    eps = rng.standard_cauchy(X.shape[0])
    return _positive(transformation_time(-(X @ beta) + eps))


def gen_aft(X, rng) -> np.ndarray:
    """log T = X1 + 0.8 X2 + X7^2 + eps, eps ~ N(0, 1)."""
    X = np.asarray(X)
    if X.shape[1] < 7:
        raise ValueError("the AFT design needs p >= 7")
    eps = rng.standard_normal(X.shape[0])
    return _positive(np.exp(X[:, 0] + 0.8 * X[:, 1] + X[:, 6] ** 2 + eps))


def gen_nonlinear(X, rng) -> np.ndarray:
    """log T = 1.5 - exp(-X1 - 0.8 X2 - X7) * eps, eps ~ N(0, 1).

    The noise scale can be large enough for T to overflow to +inf; such
    subjects are always censored since C is bounded.
    """
    X = np.asarray(X)
    if X.shape[1] < 7:
        raise ValueError("the nonlinear design needs p >= 7")
    eps = rng.standard_normal(X.shape[0])
    with np.errstate(over="ignore"):
        log_t = 1.5 - np.exp(-X[:, 0] - 0.8 * X[:, 1] - X[:, 6]) * eps
        return _positive(np.exp(log_t))


def latent_times(scenario: SimScenario, X, rng) -> np.ndarray:
    """Event times for covariate rows ``X`` (X may hold only the leading columns)."""
    p = X.shape[1]
    if scenario.model == "cox":
        return gen_cox(X, scenario.beta_vector(p), scenario.baseline_hazard, rng)
    if scenario.model == "transformation":
        return gen_transformation(X, scenario.beta_vector(p), rng)
    if scenario.model == "aft":
        return gen_aft(X, rng)
    return gen_nonlinear(X, rng)


def censoring_rate_for_bound(t, c: float) -> float:
    """P(C < T) for C ~ Unif(0, c), averaged over latent times ``t``.

    Conditional on T the probability is min(T, c) / c, which is used
    directly instead of drawing C.
    """
    return float(np.mean(np.minimum(t, c)) / c)


def calibrate_censoring(
    scenario: SimScenario,
    rng,
    tol: float = 0.005,
    pilot_n: int = 200_000,
    max_doublings: int = 60,
    latent=None,
) -> float:
    """Bisect for the Uniform(0, c) bound giving the target censoring rate.

    A pilot sample of latent times is drawn from the scenario (only the
    covariates the latent time depends on), unless ``latent`` supplies one.
    """
    target = scenario.target_cr
    if latent is None:
        dim = min(scenario.latent_dim, scenario.p)
        X = sample_covariates(pilot_n, dim, scenario.covariance, scenario.rho, rng)
        latent = latent_times(scenario, X, rng)
    t = np.asarray(latent, dtype=np.float64)

    def cr(c):
        return censoring_rate_for_bound(t, c)

    lo, hi = 1e-3, 1e3
    for _ in range(max_doublings):
        if cr(lo) > target:
            break
        lo /= 2.0
    else:
        raise ValueError("target CR unattainable")
    for _ in range(max_doublings):
        if cr(hi) < target:
            break
        hi *= 2.0
    else:
        raise ValueError("target CR unattainable")

    mid = np.sqrt(lo * hi)
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        value = cr(mid)
        if abs(value - target) <= tol:
            break
        if value > target:
            lo = mid
        else:
            hi = mid
    logger.info("censoring bound c=%.6g for target CR %.3f", mid, target)
    return float(mid)


def _pilot_key(scenario: SimScenario) -> SimScenario:
    # the bound depends on neither n nor the covariates past the latent ones
    return replace(scenario, n=3, p=max(scenario.latent_dim, 1), name="")


@functools.lru_cache(maxsize=64)
def _cached_bound(key: SimScenario, tol: float, pilot_n: int) -> float:
    rng = np.random.default_rng(np.random.SeedSequence(key.seed, spawn_key=(0,)))
    return calibrate_censoring(key, rng, tol=tol, pilot_n=pilot_n)


def calibrated_bound(scenario: SimScenario, tol: float = 0.005, pilot_n: int = 200_000) -> float:
    """Censoring bound for ``scenario``, computed once and cached."""
    return _cached_bound(_pilot_key(scenario), tol, pilot_n)


def replication_seed_sequence(seed: int, replication: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(1, replication))


def generate(scenario: SimScenario, replication: int = 0, c_upper: float | None = None) -> GeneratedSample:
    """Draw one data set; fully determined by ``(scenario.seed, replication)``."""
    if c_upper is None:
        c_upper = calibrated_bound(scenario)
    rng = np.random.default_rng(replication_seed_sequence(scenario.seed, replication))
    X = sample_covariates(scenario.n, scenario.p, scenario.covariance, scenario.rho, rng)
    t = latent_times(scenario, X[:, : scenario.latent_dim], rng)
    C = rng.uniform(0.0, c_upper, scenario.n)
    C = _positive(C)
    y = np.minimum(t, C)
    delta = (t <= C).astype(np.int8)
    return GeneratedSample(X=X, t_true=t, resp=SurvivalResponse(y, delta), c_upper=c_upper, censor=C)


def _scenario(model, n, p, covariance, rho, cr, name, seed=20240101):
    return SimScenario(model=model, n=n, p=p, covariance=covariance, rho=rho, target_cr=cr, seed=seed, name=name)


# Benchmark designs keyed by "<design>-n<N>-cr<CR%>".
PRESETS = {}
for _cr in (0.3, 0.5):
    for _n in (100, 200, 400):
        _key = f"example1-n{_n}-cr{round(_cr * 100)}"
        PRESETS[_key] = _scenario("cox", _n, 2000, "ar1", 0.6, _cr, _key)
for _cr in (0.2, 0.4):
    for _n in (200, 300):
        _key = f"example2-n{_n}-cr{round(_cr * 100)}"
        PRESETS[_key] = _scenario("transformation", _n, 2000, "ar1", 0.5, _cr, _key)
        _key = f"example4-n{_n}-cr{round(_cr * 100)}"
        PRESETS[_key] = _scenario("nonlinear", _n, 2000, "cs", 0.5, _cr, _key)
for _cr in (0.3, 0.5):
    for _n in (200, 300):
        _key = f"example3-n{_n}-cr{round(_cr * 100)}"
        PRESETS[_key] = _scenario("aft", _n, 2000, "ar1", 0.6, _cr, _key)


def preset(name: str, quick: bool = False) -> SimScenario:
    """Named benchmark design; ``quick`` shrinks p to 500."""
    try:
        scenario = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
    return replace(scenario, p=500) if quick else scenario
