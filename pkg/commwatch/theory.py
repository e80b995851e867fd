""" ARL bounds of the mixture method with p1 known

Under the null the edge statistic over tau steps is approximated by the
normal variable g_tau(Z) = drift + scale Z. With h the soft threshold,
h_tau = h(g_tau) and

    psi_tau(theta) = log E exp(theta h_tau(Z))

theta_tau solves psi_tau'(theta) = b / N and the bounds are assembled in
log space from

    H(N, theta) = theta [2 pi psi''(theta)]^(1/2) / (gamma(theta)^2 sqrt(N))
                  * exp(N [theta psi'(theta) - psi(theta)])
    gamma(theta) = theta^2 / 2 E[h_tau'(Z)^2 exp(theta h_tau(Z) - psi(theta))]

    ARL_LB = [ sum_{tau=m0}^{m1} 2N nu^2(2N sqrt(gamma) / tau^2) / (tau^2 H) ]^-1
    ARL_UB = [ int_{sqrt(2N/m1)}^{sqrt(2N/m0)} y nu^2(y sqrt(gamma)) / H dy ]^-1

with tau = 2N / y^2 (not an integer) inside the integral. N is
TheoryParams.n_eff throughout.
"""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math
from multiprocessing import Pool
from typing import NamedTuple

import numpy as np
from scipy import integrate, optimize, special

from . import settings
from .exceptions import BracketException, NoRootException, QuadratureException
from .statistics import LlrParams, soft_threshold_h

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2 * math.pi)

# 16-point Gauss-Legendre rule on [-1, 1], applied panel by panel
PANEL_NODES, PANEL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class TauProfile():
    """normal approximation of the edge statistic over tau steps"""

    tau: float
    drift: float
    scale: float

    @classmethod
    def from_params(cls, p0, p1, tau):
        llr = LlrParams(p0, p1)
        drift = tau * (p0 * llr.slope + llr.c1)
        scale = math.sqrt(tau * llr.slope ** 2 * p0 * (1 - p0))
        if not scale > 0:
            raise ValueError('degenerate profile at tau={}'.format(tau))
        return cls(float(tau), drift, scale)


class TiltedMoments(NamedTuple):
    psi: float
    psi_dot: float
    psi_ddot: float
    hdot_sq: float


class BigH(NamedTuple):
    value: float
    log_value: float


class LowerBoundTerm(NamedTuple):
    tau: int
    theta: float
    gamma: float
    log_h: float
    log_term: float

    @property
    def big_h(self):
        return math.exp(self.log_h) if self.log_h < 700 else math.inf

    @property
    def term(self):
        return math.exp(self.log_term)


class UpperBoundSample(NamedTuple):
    y: float
    tau: float
    log_integrand: float

    @property
    def integrand(self):
        return math.exp(self.log_integrand)


def _h(g, alpha):
    if alpha == 1:
        return g
    if g > 0:
        return g + math.log(alpha) + math.log1p((1 - alpha) * math.exp(-g) / alpha)
    return math.log1p(alpha * math.expm1(g))


def _h_dot(g, scale, alpha):
    if alpha == 1:
        return scale
    return scale * special.expit(g + math.log(alpha) - math.log1p(-alpha))


def h_tau(x, profile, alpha):
    """h(g_tau(x))"""
    return _h(profile.drift + profile.scale * x, alpha)


def h_tau_prime(x, profile, alpha):
    """ derivative of h_tau: scale alpha e^g / (1 - alpha + alpha e^g) """
    return float(_h_dot(profile.drift + profile.scale * x, profile.scale, alpha))


def _tilt_peak(theta, profile, alpha, z_range):
    """mode of exp(theta h_tau(z) - z^2 / 2); h_tau' <= scale puts it in [0, theta scale]"""

    def exponent(z):
        return theta * h_tau(z, profile, alpha) - 0.5 * z * z

    grid = np.linspace(-z_range, z_range + theta * profile.scale, 513)
    values = theta * soft_threshold_h(profile.drift + profile.scale * grid, alpha) - 0.5 * grid * grid
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    found = optimize.minimize_scalar(lambda z: -exponent(z), bounds=(lo, hi), method='bounded',
                                     options={'xatol': 1e-10})
    peak = found.x if -found.fun >= values[i] else grid[i]
    return peak, exponent(peak)


def tilted_moments(theta, profile, alpha, quad_tol=None, z_range=None):
    """ psi, psi', psi'' and E_theta[h_tau'^2] from one adaptive quadrature pass

    The normal density is tilted by exp(theta h_tau), re-centred on the
    tilted mode and integrated over the mode +/- z_range (together with
    the untilted |z| <= z_range), with the mode's exponent factored out.
    """

    quad_tol = settings.QUAD_TOL if quad_tol is None else quad_tol
    z_range = settings.Z_RANGE if z_range is None else z_range
    if theta < 0:
        raise ValueError('theta must be >= 0, got {}'.format(theta))

    peak, shift = _tilt_peak(theta, profile, alpha, z_range)
    centre = h_tau(peak, profile, alpha)
    drift, scale = profile.drift, profile.scale

    def integrand(z):
        g = drift + scale * z
        hz = _h(g, alpha)
        w = math.exp(theta * hz - 0.5 * z * z - shift)
        d = hz - centre
        hdot = _h_dot(g, scale, alpha)
        return np.array((w, w * d, w * d * d, w * hdot * hdot))

    lo = min(-z_range, peak - z_range)
    hi = max(z_range, peak + z_range)
    points = (peak,) if lo < peak < hi else None
    result, error, info = integrate.quad_vec(integrand, lo, hi, epsabs=0, epsrel=quad_tol,
                                             points=points, full_output=True)
    if not info.success:
        raise QuadratureException('quadrature missed tolerance {} at theta={} tau={}: {}'.format(
            quad_tol, theta, profile.tau, info.message))

    i0, i1, i2, i3 = result
    mean_shift = i1 / i0
    psi = 0.0 if theta == 0 else shift + math.log(i0) - 0.5 * LOG_2PI
    return TiltedMoments(
        psi=psi,
        psi_dot=centre + mean_shift,
        psi_ddot=max(i2 / i0 - mean_shift ** 2, 0.0),
        hdot_sq=i3 / i0,
    )


def _panel_grid(lo, hi, width):
    n_panels = max(int(math.ceil((hi - lo) / width)), 1)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * PANEL_NODES).ravel(), (half * PANEL_WEIGHTS).ravel()


def tilted_mean(theta, profile, alpha, z_range=None):
    """ psi'(theta) alone, on fixed Gauss-Legendre panels

    Panels are at most 2 / scale wide; the nearest complex singularity of
    h_tau lies pi / scale off the real axis.
    """

    z_range = settings.Z_RANGE if z_range is None else z_range
    drift, scale = profile.drift, profile.scale

    coarse = np.linspace(-z_range, z_range + theta * scale, 257)
    peak = coarse[int(np.argmax(theta * soft_threshold_h(drift + scale * coarse, alpha) - 0.5 * coarse ** 2))]

    z, weights = _panel_grid(min(-z_range, peak - z_range), max(z_range, peak + z_range), min(0.5, 2 / scale))
    hz = soft_threshold_h(drift + scale * z, alpha)
    exponent = theta * hz - 0.5 * z * z
    weights = weights * np.exp(exponent - exponent.max())
    return float(np.dot(weights, hz) / weights.sum())


def psi(theta, profile, alpha, quad_tol=None, z_range=None):
    """(psi, psi', psi'') at theta"""
    moments = tilted_moments(theta, profile, alpha, quad_tol, z_range)
    return moments.psi, moments.psi_dot, moments.psi_ddot


def gamma_fn(theta, profile, alpha, quad_tol=None, z_range=None, moments=None):
    if not theta > 0:
        raise ValueError('gamma needs theta > 0, got {}'.format(theta))
    if moments is None:
        moments = tilted_moments(theta, profile, alpha, quad_tol, z_range)
    return 0.5 * theta ** 2 * moments.hdot_sq


def _solve_theta(profile, alpha, b, n_effective, quad_tol=None, z_range=None):
    """(theta, tilted moments at theta)"""

    target = b / n_effective

    def excess(theta):
        return tilted_mean(theta, profile, alpha, z_range) - target

    if excess(0.0) >= 0:
        raise NoRootException('b/N = {:.6g} does not exceed psi\'(0) at tau={:.6g}'.format(target, profile.tau))

    lo, hi = 0.0, settings.THETA_MIN
    while excess(hi) < 0:
        lo, hi = hi, hi * 4
        if hi > settings.THETA_MAX:
            raise NoRootException('no root of psi\'(theta) = {:.6g} below theta={} at tau={:.6g}'.format(
                target, settings.THETA_MAX, profile.tau))

    theta = optimize.brentq(excess, lo, hi, xtol=1e-12, rtol=1e-9, maxiter=200)
    moments = tilted_moments(theta, profile, alpha, quad_tol, z_range)

    # one Newton step on the adaptive moments
    residual = moments.psi_dot - target
    if abs(residual) > 1e-9 * abs(target) and moments.psi_ddot > 0:
        polished = theta - residual / moments.psi_ddot
        if polished > 0:
            theta = polished
            moments = tilted_moments(theta, profile, alpha, quad_tol, z_range)
            residual = moments.psi_dot - target
    if abs(residual) > 1e-9 * abs(target):
        logger.debug('theta root at tau={:.6g} has residual {:.3g}'.format(profile.tau, residual))
    return theta, moments


def solve_theta(profile, alpha, b, n_effective, quad_tol=None, z_range=None):
    """ theta > 0 with psi'(theta) = b / n_effective """

    return _solve_theta(profile, alpha, b, n_effective, quad_tol, z_range)[0]


def big_h(n_effective, theta, moments, gamma):
    log_value = (
        math.log(theta)
        + 0.5 * (LOG_2PI + math.log(moments.psi_ddot))
        - 2 * math.log(gamma)
        - 0.5 * math.log(n_effective)
        + n_effective * (theta * moments.psi_dot - moments.psi)
    )
    value = math.exp(log_value) if log_value < 700 else math.inf
    return BigH(value, log_value)


def nu_approx(x):
    """ (2/x)[Phi(x/2) - 1/2] / ((x/2) Phi(x/2) + phi(x/2)), with nu(0) = 1 """

    if x < 0:
        raise ValueError('nu needs x >= 0, got {}'.format(x))
    if x == 0:
        return 1.0
    u = x / 2
    numerator = math.erf(u / math.sqrt(2)) / x
    denominator = u * special.ndtr(u) + math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
    return float(numerator / denominator)


def _log_nu_sq(x):
    nu = nu_approx(x)
    return 2 * math.log(nu) if nu > 0 else -math.inf


@lru_cache(maxsize=4096)
def _cached_theta_terms(params, tau, n, theta_min, theta_max):
    profile = TauProfile.from_params(params.p0, params.p1, tau)
    theta, moments = _solve_theta(profile, params.alpha, params.b, n, params.quad_tol, params.z_range)
    gamma = gamma_fn(theta, profile, params.alpha, moments=moments)
    return theta, moments, gamma, big_h(n, theta, moments, gamma).log_value


def _theta_terms(params, tau):
    """(theta, moments, gamma, log H) at a possibly fractional tau, cached per (params, tau)"""

    return _cached_theta_terms(params, float(tau), params.n_eff, settings.THETA_MIN, settings.THETA_MAX)


def lower_bound_term(params, tau):
    n = params.n_eff
    try:
        theta, moments, gamma, log_h = _theta_terms(params, tau)
    except NoRootException as e:
        logger.info('lower bound term tau={} dropped: {}'.format(tau, e))
        return LowerBoundTerm(tau, math.nan, math.nan, math.inf, -math.inf)
    argument = 2 * n * math.sqrt(gamma) / tau ** 2
    log_term = math.log(2 * n) + _log_nu_sq(argument) - 2 * math.log(tau) - log_h
    return LowerBoundTerm(tau, theta, gamma, log_h, log_term)


def _lower_bound_term(args):
    return lower_bound_term(*args)


def lower_bound_terms(params, processes=1):
    taus = range(params.m0, params.m1 + 1)
    if processes > 1:
        with Pool(processes=processes) as pool:
            return pool.map(_lower_bound_term, [(params, tau) for tau in taus])
    return [lower_bound_term(params, tau) for tau in taus]


def _inverse_log_sum(log_values, name):
    log_values = np.asarray(log_values, dtype=float)
    if not np.isfinite(log_values).any():
        raise NoRootException('every {} term is zero; b is below the asymptotic regime'.format(name))
    return float(np.exp(-special.logsumexp(log_values[np.isfinite(log_values)])))


def arl_lower_bound(params, processes=1):
    terms = lower_bound_terms(params, processes)
    return _inverse_log_sum([term.log_term for term in terms], 'lower bound')


def upper_bound_log_integrand(params, y):
    n = params.n_eff
    tau = 2 * n / y ** 2
    try:
        theta, moments, gamma, log_h = _theta_terms(params, tau)
    except NoRootException as e:
        logger.debug('upper bound integrand at y={:.6g} is zero: {}'.format(y, e))
        return -math.inf
    return math.log(y) + _log_nu_sq(y * math.sqrt(gamma)) - log_h


def upper_bound_limits(params):
    n = params.n_eff
    return math.sqrt(2 * n / params.m1), math.sqrt(2 * n / params.m0)


def upper_bound_profile(params, n_points=200):
    """integrand samples on an even y grid, as (y, tau, log integrand)"""

    lo, hi = upper_bound_limits(params)
    n = params.n_eff
    return [UpperBoundSample(y, 2 * n / y ** 2, upper_bound_log_integrand(params, y))
            for y in np.linspace(lo, hi, n_points)]


def arl_upper_bound(params, scan_points=33):
    """ inverse of the integral over y, by adaptive quadrature at params.quad_tol """

    lo, hi = upper_bound_limits(params)
    scan = [upper_bound_log_integrand(params, y) for y in np.linspace(lo, hi, scan_points)]
    finite = [v for v in scan if np.isfinite(v)]
    if not finite:
        raise NoRootException('upper bound integrand vanishes on [{:.4g}, {:.4g}]'.format(lo, hi))
    log_scale = max(finite)

    def integrand(y):
        return math.exp(upper_bound_log_integrand(params, y) - log_scale)

    value, error = integrate.quad(integrand, lo, hi, epsabs=0, epsrel=params.quad_tol, limit=200)
    if not value > 0:
        raise NoRootException('upper bound integral is zero')
    if error > max(params.quad_tol * value * 10, 1e-300):
        raise QuadratureException('upper bound integral error {:.3g} on value {:.3g}'.format(error, value))
    return math.exp(-(log_scale + math.log(value)))


def threshold_for_arl(params, target_arl, which='LB', tol=None, processes=1):
    """ threshold b whose ARL bound equals target_arl within tol (relative) """

    if not target_arl > 1:
        raise ValueError('target ARL must exceed 1, got {}'.format(target_arl))
    tol = settings.ARL_TOL if tol is None else tol

    def bound(b):
        candidate = params.with_threshold(b)
        try:
            if which == 'LB':
                return arl_lower_bound(candidate, processes)
            return arl_upper_bound(candidate)
        except NoRootException:
            return 0.0

    # walk b geometrically from 1 until the bound crosses target_arl
    step = 1.5
    b = 1.0
    arl = bound(b)
    upward = arl < target_arl
    while (arl < target_arl) == upward:
        previous = arl
        b = b * step if upward else b / step
        if b > settings.B_MAX or b < 1e-6:
            raise BracketException('no threshold in (0, {}] brackets ARL {}'.format(settings.B_MAX, target_arl))
        arl = bound(b)
        logger.debug('bracketing b={:.5g}: {} ARL {:.6g}'.format(b, which, arl))
        if (arl < previous) if upward else (arl > previous):
            raise BracketException('{} bound is not increasing in b near b={:.5g}'.format(which, b))
    if upward:
        lo, hi, f_lo, f_hi = b / step, b, _log_ratio(previous, target_arl), _log_ratio(arl, target_arl)
    else:
        lo, hi, f_lo, f_hi = b, b * step, _log_ratio(arl, target_arl), _log_ratio(previous, target_arl)

    # Illinois false position on log(ARL / target), bisecting where the bound vanished
    kept = None
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if math.isfinite(f_lo) and math.isfinite(f_hi) and f_hi > f_lo:
            secant = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if lo < secant < hi:
                mid = secant
        arl = bound(mid)
        logger.debug('refining b={:.6g}: {} ARL {:.6g}'.format(mid, which, arl))
        if abs(arl / target_arl - 1) <= tol:
            return mid
        if arl < target_arl:
            lo, f_lo = mid, _log_ratio(arl, target_arl)
            if kept == 'hi':
                f_hi /= 2
            kept = 'hi'
        else:
            hi, f_hi = mid, _log_ratio(arl, target_arl)
            if kept == 'lo':
                f_lo /= 2
            kept = 'lo'
    raise BracketException('search for ARL {} did not converge in [{}, {}]'.format(target_arl, lo, hi))


def _log_ratio(arl, target_arl):
    return math.log(arl / target_arl) if arl > 0 else -math.inf
