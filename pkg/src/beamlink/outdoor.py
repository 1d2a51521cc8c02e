"""Outdoor stochastic channel models for FSO and THz links.

FSO impairments: Beer-Lambert attenuation, Malaga turbulence, Gaussian-beam
displacement pointing, and Bernoulli angle-of-arrival interruption. THz
impairments: path loss with molecular absorption, alpha-mu small-scale fading,
and two pointing-error models (beam displacement and antenna-pattern angle
jitter with its truncated series CDF). Outage probabilities come from Monte
Carlo over composed channel draws; a semi-analytic product-distribution
integral provides the independent FSO oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import mpmath as mp
import numpy as np
from scipy import integrate as _integrate
from scipy import special as _sp
from scipy.interpolate import PchipInterpolator

from .constants import SPEED_OF_LIGHT
from .errors import ConvergenceError, DomainError
from .mathkit import RngStream, as_generator

__all__ = [
    "MalagaParams",
    "AlphaMuParams",
    "DisplacementPointing",
    "AngularPointing",
    "AoAParams",
    "UavJitter",
    "FsoChannelSpec",
    "ThzAngularSpec",
    "ThzDisplacementSpec",
    "fso_path_loss",
    "thz_path_loss",
    "turbulent_beam_width",
    "malaga_pdf",
    "malaga_mean",
    "malaga_sample",
    "alpha_mu_pdf",
    "alpha_mu_sample",
    "alpha_mu_mean",
    "displacement_pointing",
    "aoa_interruption",
    "angular_pointing_sample",
    "thz_cdf_series",
    "outage_mc",
    "fso_outage_semianalytic",
    "uav_variances",
    "weather_presets",
]


# ---------------------------------------------------------------------------
# deterministic path losses


def fso_path_loss(attenuation: float, length: float) -> float:
    """Beer-Lambert atmospheric power loss factor exp(-xi_l * L)."""
    if attenuation < 0:
        raise DomainError("attenuation factor cannot be negative")
    if not length > 0:
        raise DomainError("link length must be positive")
    return math.exp(-attenuation * length)


def thz_path_loss(
    frequency: float,
    length: float,
    tx_gain: float = 1.0,
    rx_gain: float = 1.0,
    kappa: float = 0.0,
    include_antennas: bool = True,
) -> float:
    """Amplitude path gain of a THz link.

    With include_antennas=False the antenna gains move into the pointing-error
    model and only spreading plus molecular absorption remain.
    """
    if not frequency > 0 or not length > 0:
        raise DomainError("frequency and length must be positive")
    gain = SPEED_OF_LIGHT / (4.0 * math.pi * frequency * length) * math.exp(-0.5 * kappa * length)
    if include_antennas:
        gain *= math.sqrt(tx_gain * rx_gain)
    return gain


def turbulent_beam_width(waist: float, wavelength: float, length: float, cn2: float) -> float:
    """Beam radius at the receiver including turbulence-induced spreading."""
    if not waist > 0 or not wavelength > 0 or not length > 0:
        raise DomainError("waist, wavelength and length must be positive")
    if cn2 < 0:
        raise DomainError("refractive index structure parameter cannot be negative")
    rayleigh = math.pi * waist**2 / wavelength
    wavenumber = 2.0 * math.pi / wavelength
    t = 0.55 * cn2 * wavenumber**2 * length
    spread = 1.0 + 2.0 * waist**2 * t ** (3.0 / 5.0) if t > 0 else 1.0
    return waist * math.sqrt(1.0 + spread * (length / rayleigh) ** 2)


# ---------------------------------------------------------------------------
# Malaga turbulence


@dataclass(frozen=True)
class MalagaParams:
    """Malaga optical-turbulence parameters.

    scatter_power is the total average power 2*b0 of the scatter components;
    small_scale (beta) must be a positive integer for the finite-sum PDF.
    """

    los_power: float           # Omega
    scatter_power: float       # 2*b0
    coupling: float            # rho in [0, 1)
    large_scale: float         # epsilon
    small_scale: int           # beta
    phase_delta: float = 0.0   # phi_a - phi_b

    def __post_init__(self):
        if self.los_power < 0 or not self.scatter_power > 0:
            raise DomainError("component powers must be positive")
        if not 0.0 <= self.coupling < 1.0:
            raise DomainError("coupling rho must lie in [0, 1); rho = 1 degenerates g to zero")
        if not self.large_scale > 0:
            raise DomainError("large-scale parameter must be positive")
        beta = self.small_scale
        if isinstance(beta, float) and beta.is_integer():
            beta = int(beta)
            object.__setattr__(self, "small_scale", beta)
        if not isinstance(beta, (int, np.integer)) or beta < 1:
            raise DomainError("small-scale parameter beta must be a positive integer")

    @property
    def g(self) -> float:
        return self.scatter_power * (1.0 - self.coupling)

    @property
    def omega_prime(self) -> float:
        cross = 2.0 * math.sqrt(
            self.scatter_power * self.coupling * self.los_power
        ) * math.cos(self.phase_delta)
        return self.los_power + self.scatter_power * self.coupling + cross


def malaga_mean(params: MalagaParams) -> float:
    """First moment g + Omega' of the Malaga irradiance."""
    return params.g + params.omega_prime


def malaga_pdf(params: MalagaParams, h):
    """Malaga probability density, vectorised over h > 0."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("Malaga density is defined for h > 0")
    eps, beta = params.large_scale, params.small_scale
    g, omega_p = params.g, params.omega_prime
    gb = g * beta + omega_p
    norm = (
        2.0 * eps ** (eps / 2.0)
        / (g ** (1.0 + eps / 2.0) * _sp.gamma(eps))
        * (g * beta / gb) ** (beta + eps / 2.0)
    )
    arg = 2.0 * np.sqrt(eps * beta * h / gb)
    out = np.zeros_like(h)
    for s in range(1, beta + 1):
        a_s = (
            _sp.comb(beta - 1, s - 1, exact=True)
            * gb ** (1.0 - s / 2.0)
            / math.factorial(s - 1)
            * (omega_p / g) ** (s - 1)
            * (eps / beta) ** (s / 2.0)
        )
        out += a_s * h ** ((eps + s) / 2.0 - 1.0) * _sp.kv(eps - s, arg)
    out *= norm
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=16)
def _malaga_inverse_cdf(params: MalagaParams):
    """Monotone interpolant of the inverse CDF, built by adaptive quadrature."""
    mean = malaga_mean(params)

    def pdf(x):
        return malaga_pdf(params, x)

    hi = 10.0 * mean
    while _integrate.quad(pdf, hi, np.inf, limit=200)[0] > 1e-12:
        hi *= 2.0
    lo = mean * 1e-6
    knots = np.geomspace(lo, hi, 512)
    head = _integrate.quad(pdf, 0.0, knots[0], limit=200)[0]
    segments = [
        _integrate.quad(pdf, a, b, limit=200)[0] for a, b in zip(knots[:-1], knots[1:])
    ]
    cdf = head + np.concatenate(([0.0], np.cumsum(segments)))
    keep = np.concatenate(([True], np.diff(cdf) > 1e-15))
    cdf, knots = cdf[keep], knots[keep]
    interp = PchipInterpolator(cdf, knots, extrapolate=False)
    return interp, float(cdf[0]), float(cdf[-1]), float(knots[0]), float(knots[-1])


def malaga_sample(params: MalagaParams, rng, size=None):
    """Draw Malaga variates by inverse transform over a cached CDF table."""
    gen = as_generator(rng)
    interp, c_lo, c_hi, h_lo, h_hi = _malaga_inverse_cdf(params)
    u = gen.random(size=size if size is not None else 1)
    u = np.clip(u, c_lo, c_hi)
    out = interp(u)
    out = np.where(np.isnan(out), np.clip(u, h_lo, h_hi), out)
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# alpha-mu fading


@dataclass(frozen=True)
class AlphaMuParams:
    """alpha-mu generalised fading; mu must be a positive integer."""

    alpha: float
    mu: int
    root_mean: float = 1.0  # alpha-root mean of the envelope

    def __post_init__(self):
        if not self.alpha > 0 or not self.root_mean > 0:
            raise DomainError("alpha and the root mean value must be positive")
        mu = self.mu
        if isinstance(mu, float) and mu.is_integer():
            mu = int(mu)
            object.__setattr__(self, "mu", mu)
        if not isinstance(mu, (int, np.integer)) or mu < 1:
            raise DomainError("mu must be a positive integer")


def alpha_mu_pdf(params: AlphaMuParams, g):
    g = np.asarray(g, dtype=float)
    a, mu, ghat = params.alpha, params.mu, params.root_mean
    out = (
        a * mu**mu / (ghat ** (a * mu) * _sp.gamma(mu))
        * g ** (a * mu - 1.0)
        * np.exp(-mu * (g / ghat) ** a)
    )
    return float(out) if out.ndim == 0 else out


def alpha_mu_sample(params: AlphaMuParams, rng, size=None):
    """Draw envelopes as ghat * (G/mu)^(1/alpha) with G ~ Gamma(mu, 1)."""
    gen = as_generator(rng)
    g = gen.gamma(params.mu, 1.0, size=size)
    return params.root_mean * (g / params.mu) ** (1.0 / params.alpha)


def alpha_mu_mean(params: AlphaMuParams) -> float:
    """Analytic first moment of the alpha-mu envelope."""
    a, mu = params.alpha, params.mu
    return params.root_mean * _sp.gamma(mu + 1.0 / a) / (_sp.gamma(mu) * mu ** (1.0 / a))


# ---------------------------------------------------------------------------
# FSO displacement pointing


@dataclass(frozen=True)
class DisplacementPointing:
    """Gaussian-beam pointing loss driven by transverse displacement jitter."""

    waist_at_rx: float        # w_z
    aperture_radius: float    # r_a
    displacement_std: float   # sigma_m; 0 degenerates to the constant A0

    def __post_init__(self):
        if not self.waist_at_rx > 0 or not self.aperture_radius > 0:
            raise DomainError("beam waist and aperture radius must be positive")
        if self.displacement_std < 0:
            raise DomainError("displacement deviation cannot be negative")

    @property
    def v(self) -> float:
        return math.sqrt(math.pi / 2.0) * self.aperture_radius / self.waist_at_rx

    @property
    def a0(self) -> float:
        """Collected power fraction with perfect pointing."""
        return float(_sp.erf(self.v)) ** 2

    @property
    def equivalent_waist(self) -> float:
        v = self.v
        w_e_sq = self.waist_at_rx**2 * math.sqrt(math.pi) * float(_sp.erf(v)) / (
            2.0 * v * math.exp(-v * v)
        )
        return math.sqrt(w_e_sq)

    @property
    def xi(self) -> float:
        if self.displacement_std == 0.0:
            return math.inf
        return self.equivalent_waist / (2.0 * self.displacement_std)

    def pdf(self, h):
        h = np.asarray(h, dtype=float)
        if math.isinf(self.xi):
            raise DomainError("degenerate pointing (sigma_m = 0) has no density")
        x2 = self.xi**2
        out = np.where(
            (h > 0) & (h <= self.a0), x2 / self.a0**x2 * h ** (x2 - 1.0), 0.0
        )
        return float(out) if out.ndim == 0 else out

    def cdf(self, h):
        h = np.asarray(h, dtype=float)
        if math.isinf(self.xi):
            out = np.where(h >= self.a0, 1.0, 0.0)
        else:
            out = np.clip(np.maximum(h, 0.0) / self.a0, 0.0, 1.0) ** self.xi**2
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        if math.isinf(self.xi):
            return self.a0
        x2 = self.xi**2
        return self.a0 * x2 / (x2 + 1.0)

    def sample(self, rng, size=None):
        """Exact inverse-CDF draws: h = A0 * u^(1 / xi^2)."""
        gen = as_generator(rng)
        if math.isinf(self.xi):
            if size is None:
                return self.a0
            return np.full(size, self.a0)
        u = gen.random(size=size)
        return self.a0 * u ** (1.0 / self.xi**2)


def displacement_pointing(params: DisplacementPointing) -> DisplacementPointing:
    """The pointing model itself carries the pdf, sampler, A0 and xi."""
    return params


# ---------------------------------------------------------------------------
# AoA interruption


@dataclass(frozen=True)
class AoAParams:
    """Angle-of-arrival interruption: link drops when AoA leaves the FoV."""

    fov: float       # theta_FoV, half... full receiver field of view angle
    aoa_std: float   # sigma_a
    sides: int = 2   # 2 or 4: one or two vibrating terminals

    def __post_init__(self):
        if not self.fov > 0 or not self.aoa_std > 0:
            raise DomainError("field of view and AoA deviation must be positive")
        if self.sides not in (2, 4):
            raise DomainError("sides must be 2 or 4")

    @property
    def interruption_probability(self) -> float:
        return math.exp(-self.fov**2 / (self.sides * self.aoa_std**2))

    def sample(self, rng, size=None):
        gen = as_generator(rng)
        u = gen.random(size=size)
        out = np.where(u < self.interruption_probability, 0.0, 1.0)
        return float(out) if size is None else out


def aoa_interruption(params: AoAParams):
    """(interruption probability a1, Bernoulli sampler over {0, 1})."""
    return params.interruption_probability, params.sample


# ---------------------------------------------------------------------------
# THz angular pointing


@dataclass(frozen=True)
class AngularPointing:
    """Antenna-pattern pointing error from Gaussian angle jitter at both ends.

    angle_stds and beamwidths are (tx az, tx el, rx az, rx el) quadruples;
    max_gain is the common peak antenna gain G0.
    """

    angle_stds: tuple[float, float, float, float]
    beamwidths: tuple[float, float, float, float]
    max_gain: float

    def __post_init__(self):
        stds = tuple(float(s) for s in self.angle_stds)
        bws = tuple(float(b) for b in self.beamwidths)
        if len(stds) != 4 or len(bws) != 4:
            raise DomainError("angle_stds and beamwidths must have four entries")
        if any(s <= 0 for s in stds) or any(b <= 0 for b in bws):
            raise DomainError("angle deviations and beamwidths must be positive")
        if not self.max_gain > 0:
            raise DomainError("maximum gain must be positive")
        object.__setattr__(self, "angle_stds", stds)
        object.__setattr__(self, "beamwidths", bws)

    @classmethod
    def from_ula(cls, n_antennas: int, angle_stds) -> "AngularPointing":
        """Uniform-linear-array approximation: G0 = pi n^2, HPBW = 1.061/n."""
        if n_antennas < 1:
            raise DomainError("antenna count must be positive")
        bw = 1.061 / n_antennas
        stds = tuple(angle_stds) if np.iterable(angle_stds) else (angle_stds,) * 4
        return cls(angle_stds=stds, beamwidths=(bw,) * 4,
                   max_gain=math.pi * n_antennas**2)

    @property
    def xi_vector(self) -> tuple[float, float, float, float]:
        return tuple(s**2 / b**2 for s, b in zip(self.angle_stds, self.beamwidths))

    @property
    def xi_min(self) -> float:
        return min(self.xi_vector)

    @property
    def c_g(self) -> float:
        xm = self.xi_min
        return math.prod(math.sqrt(xm / x) for x in self.xi_vector)

    def mean(self) -> float:
        """E[g_p] = G0 * prod (1 + xi_i)^(-1/2)."""
        return self.max_gain * math.prod(1.0 / math.sqrt(1.0 + x) for x in self.xi_vector)


def angular_pointing_sample(params: AngularPointing, rng, size=None):
    """Draw g_p = sqrt(G_tx) * sqrt(G_rx) under Gaussian angle jitter."""
    gen = as_generator(rng)
    shape = (4,) if size is None else (4,) + (tuple(size) if np.iterable(size) else (size,))
    z = gen.standard_normal(shape)
    exponent = np.zeros(shape[1:])
    for i in range(4):
        exponent = exponent + (params.angle_stds[i] * z[i] / params.beamwidths[i]) ** 2
    out = params.max_gain * np.exp(-0.5 * exponent)
    return float(out) if size is None else out


_SERIES_MAX_TERMS = 10_000
_KERNEL_NODES = 96


def _series_kernel(a1: float, a3: float, xi_p: float, k: int) -> float:
    """Normalised inner integral of the k-th series term.

    Computes T_k = int_0^inf y^{k+1} exp(A1 y - A3 y^2 / 2) dy
    / (Gamma(k+2) xi_p^{k+2}). This equals the printed binomial sum over
    upper incomplete gamma functions exactly (complete the square and expand
    (u + A1/A3)^{k+1}), but unlike that sum it has a positive integrand and
    is numerically stable; the identity is pinned by a high-precision test.
    """
    # scale t = y / xi_p so the k-dependence is tame
    a = a1 * xi_p
    b = 0.5 * a3 * xi_p * xi_p
    n = k + 1
    if b > 0:
        peak = (a + math.sqrt(a * a + 8.0 * b * n)) / (4.0 * b)
    else:
        peak = -n / a  # a < 0 whenever b = 0 is approached
    width = 1.0 / math.sqrt(n / peak**2 + 2.0 * b)

    def log_f_at(t):
        return n * math.log(t) + a * t - b * t * t

    # expand the window until the log-integrand has dropped ~60 e-folds;
    # the upper tail decays only exponentially for small k, so a fixed
    # multiple of the Gaussian width is not enough there
    floor = log_f_at(peak) - 60.0
    hi = peak + 12.0 * width
    for _ in range(60):
        if log_f_at(hi) <= floor:
            break
        hi += max(12.0 * width, peak)
    lo = max(peak - 12.0 * width, 0.0)
    for _ in range(60):
        if lo == 0.0 or log_f_at(lo) <= floor:
            break
        lo = max(lo - (peak - lo), 0.0)

    nodes, weights = np.polynomial.legendre.leggauss(_KERNEL_NODES)
    t = (nodes + 1.0) * 0.5 * (hi - lo) + lo
    w = weights * 0.5 * (hi - lo)
    with np.errstate(divide="ignore"):
        log_f = n * np.log(t) + a * t - b * t * t
    log_f = np.where(t > 0.0, log_f, -np.inf)
    top = float(np.max(log_f))
    if top == -math.inf:
        return 0.0
    body = float(np.sum(w * np.exp(log_f - top)))
    return body * math.exp(top - _sp.gammaln(k + 2))


def _series_term_gamma_form(a1, a3, xi_p, k, dps=200):
    """Printed incomplete-gamma closed form of the same inner term.

    Needs roughly 2 decimal digits of working precision per series index k
    because the binomial sum cancels; used as a test oracle for
    _series_kernel, not on the production path.
    """
    with mp.workdps(dps):
        a1m, a3m, xim = mp.mpf(a1), mp.mpf(a3), mp.mpf(xi_p)
        x0 = a1m * a1m / (2 * a3m)
        total = mp.mpf(0)
        for j in range(k + 2):
            total += (
                mp.mpf(2) ** (j - k - 2)
                * mp.binomial(k + 1, j)
                * a1m ** (k - j + 1)
                * (a3m / 2) ** (mp.mpf(j - 3) / 2 - k)
                * mp.e**x0
                * mp.gammainc(mp.mpf(j + 1) / 2, a=x0)
            )
        return float(total / (mp.gamma(k + 2) * xim ** (k + 2)))


class _DeltaSeries:
    """Lazily extended expansion coefficients for the weighted chi-square sum.

    gamma_k = sum_i (1 - xi'/xi_i)^k / (2k) and
    Delta_k = (1/k) sum_{i=1}^{k} i * gamma_i * Delta_{k-i}, Delta_0 = 1
    (gamma-sum expansion of the log-gain distribution).
    """

    def __init__(self, xi):
        self.ratios = [1.0 - min(xi) / x for x in xi]
        self.gammas = [0.0]
        self.deltas = [1.0]

    def __getitem__(self, k: int) -> float:
        while len(self.deltas) <= k:
            i = len(self.gammas)
            self.gammas.append(sum(r**i for r in self.ratios) / (2.0 * i))
            j = len(self.deltas)
            self.deltas.append(
                sum(i * self.gammas[i] * self.deltas[j - i] for i in range(1, j + 1)) / j
            )
        return self.deltas[k]


def thz_cdf_series(
    pointing: AngularPointing,
    fading: AlphaMuParams,
    path_gain: float,
    h: float,
    truncation_tol: float = 1e-9,
) -> float:
    """Series CDF of h_thz = path_gain * g_t * g_p (antenna-pattern pointing).

    Truncates adaptively once the last retained k-term falls below
    truncation_tol; raises ConvergenceError if 10^4 terms are not enough.
    """
    if not truncation_tol > 0:
        raise DomainError("truncation tolerance must be positive")
    if not path_gain > 0:
        raise DomainError("path gain must be positive")
    if not h > 0:
        raise DomainError("channel value must be positive")

    xi = pointing.xi_vector
    xi_p = pointing.xi_min
    c_g = pointing.c_g
    alpha, mu, ghat = fading.alpha, fading.mu, fading.root_mean
    g0 = pointing.max_gain

    a2 = mu / ghat**alpha
    a0h = (h / (g0 * path_gain)) ** alpha
    log_head = -a2 * a0h

    m_params = []
    for m in range(mu):
        a1 = m * alpha - 1.0 / xi_p - a2 * a0h * alpha
        a3 = alpha**2 * a2 * a0h
        log_front = m * math.log(a2 * a0h) - _sp.gammaln(m + 1) if m > 0 else 0.0
        m_params.append((a1, a3, log_front))

    delta = _DeltaSeries(xi)
    total = 0.0
    k = 0
    while True:
        inner = 0.0
        for a1, a3, log_front in m_params:
            inner += math.exp(log_front) * _series_kernel(a1, a3, xi_p, k)
        term = c_g * delta[k] * math.exp(log_head) * inner
        total += term
        if abs(term) < truncation_tol:
            break
        k += 1
        if k > _SERIES_MAX_TERMS:
            raise ConvergenceError(
                "angular-pointing series did not converge within 10^4 terms",
                best_estimate=float(1.0 - total),
            )
    return min(max(1.0 - total, 0.0), 1.0)


# ---------------------------------------------------------------------------
# composed channel specs and outage


@dataclass(frozen=True)
class FsoChannelSpec:
    """FSO channel h = h_l * h_t * h_p * h_a; absent components contribute 1."""

    path_loss: float = 1.0
    turbulence: MalagaParams | None = None
    pointing: DisplacementPointing | None = None
    aoa: AoAParams | None = None

    def __post_init__(self):
        if not 0.0 < self.path_loss <= 1.0:
            raise DomainError("path loss factor must lie in (0, 1]")

    @property
    def reference_gain(self) -> float:
        """Mean-channel reference: h_l * (g + Omega') * A0 * (1 - a1)."""
        ref = self.path_loss
        if self.turbulence is not None:
            ref *= malaga_mean(self.turbulence)
        if self.pointing is not None:
            ref *= self.pointing.a0
        if self.aoa is not None:
            ref *= 1.0 - self.aoa.interruption_probability
        return ref

    def sample(self, rng, size):
        gen = as_generator(rng)
        h = np.full(size, self.path_loss)
        if self.turbulence is not None:
            h = h * malaga_sample(self.turbulence, gen, size)
        if self.pointing is not None:
            h = h * self.pointing.sample(gen, size)
        if self.aoa is not None:
            h = h * self.aoa.sample(gen, size)
        return h


@dataclass(frozen=True)
class ThzAngularSpec:
    """THz channel h = g_l' * g_t * g_p with antenna-pattern pointing."""

    path_gain: float  # g_l', antennas excluded
    pointing: AngularPointing
    fading: AlphaMuParams | None = None

    def __post_init__(self):
        if not self.path_gain > 0:
            raise DomainError("path gain must be positive")

    @property
    def reference_gain(self) -> float:
        return self.path_gain * self.pointing.max_gain

    def sample(self, rng, size):
        gen = as_generator(rng)
        h = self.path_gain * angular_pointing_sample(self.pointing, gen, size)
        if self.fading is not None:
            h = h * alpha_mu_sample(self.fading, gen, size)
        return h


@dataclass(frozen=True)
class ThzDisplacementSpec:
    """THz channel h = g_l * g_t * h_p with FSO-style displacement pointing."""

    path_gain: float  # g_l, antennas included
    pointing: DisplacementPointing | None = None
    fading: AlphaMuParams | None = None

    def __post_init__(self):
        if not self.path_gain > 0:
            raise DomainError("path gain must be positive")

    @property
    def reference_gain(self) -> float:
        ref = self.path_gain
        if self.fading is not None:
            ref *= alpha_mu_mean(self.fading)
        if self.pointing is not None:
            ref *= self.pointing.mean()
        return ref

    def sample(self, rng, size):
        gen = as_generator(rng)
        h = np.full(size, self.path_gain)
        if self.fading is not None:
            h = h * alpha_mu_sample(self.fading, gen, size)
        if self.pointing is not None:
            h = h * self.pointing.sample(gen, size)
        return h


def outage_mc(link, avg_snr: float, threshold: float, samples: int, rng):
    """Monte Carlo outage probability P(gamma < gamma_th).

    Instantaneous SNR convention: gamma = avg_snr * (h / h_ref)^2 where h_ref
    is the spec's mean-channel reference gain, so avg_snr is the SNR of the
    mean channel. Returns (outage, binomial standard error); deterministic for
    a given RngStream.
    """
    if samples < 1:
        raise DomainError("sample count must be positive")
    if not avg_snr > 0:
        raise DomainError("average SNR must be positive")
    if threshold < 0:
        raise DomainError("threshold SNR cannot be negative")
    h = link.sample(rng, samples)
    critical = link.reference_gain * math.sqrt(threshold / avg_snr)
    p = float(np.count_nonzero(h < critical)) / samples
    stderr = math.sqrt(p * (1.0 - p) / samples)
    return p, stderr


def _malaga_cdf(params: MalagaParams, x: float) -> float:
    if x <= 0:
        return 0.0
    val, _ = _integrate.quad(lambda t: malaga_pdf(params, t), 0.0, x, limit=400)
    return min(max(val, 0.0), 1.0)


def fso_outage_semianalytic(spec: FsoChannelSpec, avg_snr: float, threshold: float) -> float:
    """Outage via 1D integration of the product-distribution CDF.

    Independent of the Monte Carlo path: P(h_t * h_p < y) is computed as an
    outer quadrature over the turbulence density with the closed-form pointing
    CDF inside, then mixed with the AoA interruption mass. Valid for
    threshold > 0 (at exactly 0 the outage is 0 by the strict inequality).
    """
    if not avg_snr > 0:
        raise DomainError("average SNR must be positive")
    if threshold == 0.0:
        return 0.0
    y = spec.reference_gain * math.sqrt(threshold / avg_snr) / spec.path_loss
    a1 = spec.aoa.interruption_probability if spec.aoa is not None else 0.0

    if spec.turbulence is None and spec.pointing is None:
        conditional = 1.0 if 1.0 < y else 0.0
    elif spec.turbulence is None:
        conditional = float(spec.pointing.cdf(y))
    elif spec.pointing is None:
        conditional = _malaga_cdf(spec.turbulence, y)
    else:
        # P(h_t h_p < y): below the knee h_t = y/A0 the pointing CDF
        # saturates at 1; beyond it integrate the turbulence density
        # against the closed-form pointing CDF.
        pointing = spec.pointing
        turb = spec.turbulence
        knee = y / pointing.a0
        head = _malaga_cdf(turb, knee)

        def tail(t):
            return malaga_pdf(turb, t) * pointing.cdf(y / t)

        tail_val, _ = _integrate.quad(tail, knee, np.inf, limit=400)
        conditional = min(head + tail_val, 1.0)

    return min(a1 + (1.0 - a1) * conditional, 1.0)


# ---------------------------------------------------------------------------
# UAV jitter


@dataclass(frozen=True)
class UavJitter:
    """Position/orientation jitter of the two terminals plus boresight bias.

    position_stds = (tx x, tx y, rx x, rx y) in metres; orientation_stds
    likewise in radians; boresight_means = (tx x, tx y, rx x, rx y) biases.
    """

    position_stds: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    orientation_stds: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    boresight_means: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    link_type: str = "u2u"

    def __post_init__(self):
        for name in ("position_stds", "orientation_stds", "boresight_means"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) != 4:
                raise DomainError(f"{name} must have four entries")
            if name != "boresight_means" and any(v < 0 for v in vals):
                raise DomainError(f"{name} cannot contain negative deviations")
            object.__setattr__(self, name, vals)
        if self.link_type not in ("u2u", "u2g", "g2u"):
            raise DomainError("link_type must be one of u2u, u2g, g2u")


def _cubic_mix(mu_x, mu_y, sx, sy, scale=1.0) -> float:
    """((3 Z^2 mu_x^2 sx^4 + 3 Z^2 mu_y^2 sy^4 + sx^6 + sy^6) / 2)^(1/3)."""
    return (
        (3.0 * scale**2 * mu_x**2 * sx**4 + 3.0 * scale**2 * mu_y**2 * sy**4
         + sx**6 + sy**6) / 2.0
    ) ** (1.0 / 3.0)


def uav_variances(jitter: UavJitter, length: float):
    """(displacement variance sigma_m^2 [m^2], AoA variance sigma_a^2 [rad^2])."""
    if not length > 0:
        raise DomainError("link length must be positive")
    txp_x, txp_y, rxp_x, rxp_y = jitter.position_stds
    txo_x, txo_y, rxo_x, rxo_y = jitter.orientation_stds
    mu_tx, mu_ty, mu_rx, mu_ry = jitter.boresight_means

    if jitter.link_type == "g2u":
        sigma_m_sq = txp_x**2 + rxp_x**2 + txp_y**2 + rxp_y**2
    else:
        sdx = math.sqrt(length**2 * txo_x**2 + txp_x**2 + rxp_x**2)
        sdy = math.sqrt(length**2 * txo_y**2 + txp_y**2 + rxp_y**2)
        sigma_m_sq = _cubic_mix(mu_tx, mu_ty, sdx, sdy, scale=length)

    if jitter.link_type == "u2u":
        sx = math.sqrt(txo_x**2 + rxo_x**2)
        sy = math.sqrt(txo_y**2 + rxo_y**2)
        sigma_a_sq = _cubic_mix(mu_tx + mu_rx, mu_ty + mu_ry, sx, sy)
    elif jitter.link_type == "u2g":
        sigma_a_sq = _cubic_mix(mu_tx, mu_ty, txo_x, txo_y)
    else:
        sigma_a_sq = _cubic_mix(mu_rx, mu_ry, rxo_x, rxo_y)

    return sigma_m_sq, sigma_a_sq


def uav_fso_channel(
    jitter: UavJitter,
    length: float,
    wavelength: float,
    beam_waist: float,
    cn2: float,
    aperture_radius: float,
    fov: float,
    turbulence: MalagaParams | None,
    attenuation: float = 0.0,
) -> FsoChannelSpec:
    """Compose the FSO channel spec for a UAV link from its jitter variances."""
    sigma_m_sq, sigma_a_sq = uav_variances(jitter, length)
    w_z = turbulent_beam_width(beam_waist, wavelength, length, cn2)
    pointing = DisplacementPointing(
        waist_at_rx=w_z, aperture_radius=aperture_radius,
        displacement_std=math.sqrt(sigma_m_sq),
    )
    sides = 4 if jitter.link_type == "u2u" else 2
    aoa = AoAParams(fov=fov, aoa_std=math.sqrt(sigma_a_sq), sides=sides)
    return FsoChannelSpec(
        path_loss=fso_path_loss(attenuation, length),
        turbulence=turbulence,
        pointing=pointing,
        aoa=aoa,
    )


def uav_thz_channel(
    jitter: UavJitter,
    length: float,
    frequency: float,
    n_antennas: int,
    fading: AlphaMuParams | None,
    kappa: float = 0.0,
) -> ThzAngularSpec:
    """Compose the THz angular-pointing spec for a UAV link.

    The total displacement deviation divided by the link length becomes the
    pointing-angle deviation, assigned to all four angle components equally.
    """
    sigma_m_sq, _ = uav_variances(jitter, length)
    sigma_angle = math.sqrt(sigma_m_sq) / length
    pointing = AngularPointing.from_ula(n_antennas, sigma_angle)
    path = thz_path_loss(frequency, length, kappa=kappa, include_antennas=False)
    return ThzAngularSpec(path_gain=path, pointing=pointing, fading=fading)


# ---------------------------------------------------------------------------
# weather presets


@lru_cache(maxsize=1)
def weather_presets() -> dict[str, float]:
    """Weather condition -> Beer-Lambert attenuation factor xi_l [1/m]."""
    path = resources.files("beamlink.data").joinpath("weather_presets.csv")
    presets = {}
    with resources.as_file(path) as p, open(p, newline="") as fh:
        for row in csv.DictReader(fh):
            presets[row["condition_name"]] = float(row["xi_l_per_km"]) / 1000.0
    return presets
