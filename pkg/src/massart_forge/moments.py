"""Moments of the comb measures: exact recurrences, an independent
quadrature oracle, and the explicit discrepancy bounds.

Two measurement routes exist on purpose.  The recurrence route assembles
moments from the integration-by-parts identity per piece; the oracle route
integrates numerically with QUADPACK.  Bound checks that live below the
double rounding floor (the Fourier certificates) instead go through the
compensated double-double kernel in ddcore.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .ddcore import comb_gaussian_moments, comb_moment_discrepancies
from .errors import MassartForgeError, MomentRangeError
from .hardpair import (
    HardPair,
    PiecewiseGaussianMeasure,
    phi_mass,
    gaussian_pdf,
)

__all__ = [
    "K_MAX",
    "gaussian_moment",
    "truncated_gaussian_moment",
    "measure_moment",
    "quadrature_moment",
    "MomentReport",
    "moment_discrepancy_report",
    "FourierBoundCertificate",
    "fourier_discrepancy_bound",
    "normalized_discrepancy_bound",
    "fourier_certificate_check",
    "scaling_law_points",
    "ChiSquare",
    "chi_square_vs_gaussian",
    "comb_gaussian_moments",
    "comb_moment_discrepancies",
]

K_MAX = 64


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def gaussian_moment(t: int) -> float:
    """E G^t for standard normal G: 0 for odd t, (t-1)!! for even t."""
    if t < 0:
        raise MomentRangeError(f"t = {t} must be nonnegative")
    if t % 2 == 1:
        return 0.0
    return float(_double_factorial(t - 1)) if t > 0 else 1.0


def _edge_term(x: float, power: int) -> float:
    # x^power * G(x), with the correct 0 limit at +-inf
    if math.isinf(x):
        return 0.0
    return x**power * float(gaussian_pdf(x))


def truncated_gaussian_moment(a: float, b: float, t: int) -> float:
    """Integral of x^t G(x) over [a, b] by the integration-by-parts recurrence

        M_t = (t-1) M_{t-2} + a^{t-1} G(a) - b^{t-1} G(b),
        M_0 = Phi(b) - Phi(a),  M_1 = G(a) - G(b).
    """
    if a > b:
        raise ValueError(f"a = {a} > b = {b}")
    if t < 0:
        raise MomentRangeError(f"t = {t} must be nonnegative")
    m_prev2 = float(phi_mass(a, b))
    if t == 0:
        return m_prev2
    m_prev1 = _edge_term(a, 0) - _edge_term(b, 0)
    if t == 1:
        return m_prev1
    for j in range(2, t + 1):
        m_j = (j - 1) * m_prev2 + _edge_term(a, j - 1) - _edge_term(b, j - 1)
        m_prev2, m_prev1 = m_prev1, m_j
    return m_prev1


def _piece_moment_table(a: np.ndarray, b: np.ndarray, t: int) -> np.ndarray:
    """M_j(a_i, b_i) for j = 0..t, vectorised over pieces."""
    ga, gb = gaussian_pdf(a), gaussian_pdf(b)
    table = np.empty((t + 1, len(a)))
    table[0] = phi_mass(a, b)
    if t >= 1:
        table[1] = ga - gb
    apow = np.ones_like(a)
    bpow = np.ones_like(b)
    for j in range(2, t + 1):
        apow = apow * a
        bpow = bpow * b
        table[j] = (j - 1) * table[j - 2] + apow * ga - bpow * gb
    return table


def measure_moment(measure: PiecewiseGaussianMeasure, t: int, k_max: int = K_MAX) -> float:
    """E X^t under the normalised measure, assembled per piece.

    Shifted pieces expand (x - h)^t binomially over truncated moments of
    the shifted interval; per-piece terms are combined with exact
    compensated summation.
    """
    if not (0 <= t <= k_max):
        raise MomentRangeError(f"t = {t} outside [0, k_max = {k_max}]")
    a_s = measure.a + measure.shift
    b_s = measure.b + measure.shift
    table = _piece_moment_table(a_s, b_s, t)
    if not np.all(np.isfinite(table)):
        raise MomentRangeError(f"intermediate overflow computing moment t = {t}")
    terms: list[float] = []
    for i in range(len(measure.a)):
        s = measure.scale[i]
        h = measure.shift[i]
        if h == 0.0:
            terms.append(s * table[t, i])
        else:
            for j in range(t + 1):
                terms.append(s * math.comb(t, j) * (-h) ** (t - j) * table[j, i])
    total = math.fsum(terms)
    if not math.isfinite(total):
        raise MomentRangeError(f"moment t = {t} overflowed the double range")
    return total / measure.z


def quadrature_moment(measure: PiecewiseGaussianMeasure, t: int) -> float:
    """Independent oracle: adaptive quadrature of x^t against the density.

    QUADPACK per piece, tolerance 1e-13 absolute with a matching relative
    target for large-magnitude integrands.
    """
    vals = []
    for i in range(len(measure.a)):
        s, h, z = measure.scale[i], measure.shift[i], measure.z
        f = lambda x: x**t * s * float(gaussian_pdf(x + h)) / z
        v, _ = quad(f, measure.a[i], measure.b[i], epsabs=1e-13, epsrel=1e-13, limit=200)
        vals.append(v)
    return math.fsum(vals)


@dataclass(frozen=True)
class FourierBoundCertificate:
    """Explicit certified bound on |E G^t - E comb^t| for the box profile:

        total = 2 * t! * (2 delta / pi)^t * sum_{n >= 1} exp(-(pi n / delta)^2 / 2)

    series_terms hold the per-n bounds t! (2 delta/pi)^t exp(-(pi n/delta)^2/2),
    truncated once terms fall below 1e-30 relative; total = 2 * sum(terms).
    log_total carries the bound in log space for orders where t! overflows.
    """

    t: int
    delta: float
    series_terms: tuple[float, ...]
    total: float
    log_total: float


def fourier_discrepancy_bound(t: int, delta: float) -> FourierBoundCertificate:
    if t < 0:
        raise MomentRangeError(f"t = {t} must be nonnegative")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta = {delta} must lie in (0, 1)")
    log_pref = math.lgamma(t + 1) + t * math.log(2.0 * delta / math.pi)
    exps = []
    n = 1
    while True:
        e = -0.5 * (math.pi * n / delta) ** 2
        exps.append(e)
        if e - exps[0] < -69.0:  # relative 1e-30 cutoff
            break
        n += 1
    series_sum = math.fsum(math.exp(e) for e in exps)
    log_total = math.log(2.0) + log_pref + math.log(series_sum)
    try:
        pref = math.exp(log_pref)
        terms = tuple(pref * math.exp(e) for e in exps)
        total = 2.0 * math.fsum(terms)
    except OverflowError:
        terms = ()
        total = math.inf
    return FourierBoundCertificate(
        t=t, delta=delta, series_terms=terms, total=total, log_total=log_total
    )


def normalized_discrepancy_bound(t: int, delta: float) -> float:
    """Certified bound on |E G^t - E A^t| for the normalised comb.

    Chains the raw certificate with the explicit normalisation correction
    |1/Z - 1| <= c0 / (1 - c0), c0 the order-0 certificate:
    |E A^t - E G^t| <= total_t + (|E G^t| + total_t) * c0/(1-c0).
    """
    total_t = fourier_discrepancy_bound(t, delta).total
    c0 = fourier_discrepancy_bound(0, delta).total
    if c0 >= 1.0:
        return math.inf
    amp = c0 / (1.0 - c0)
    return total_t + (abs(gaussian_moment(t)) + total_t) * amp


def fourier_certificate_check(
    delta: float, eps: float, t_max: int = 8
) -> list[tuple[int, float, float, bool]]:
    """Measured comb discrepancies (double-double) against the certificates.

    Returns (t, measured, bound, measured <= bound) per order.
    """
    measured = comb_moment_discrepancies(delta, eps, t_max)
    out = []
    for t in range(t_max + 1):
        bound = fourier_discrepancy_bound(t, delta).total
        out.append((t, measured[t], bound, measured[t] <= bound))
    return out


def scaling_law_points(
    zeta: float, d_values: list[int], t: int, eps_fraction: float = 0.1
) -> list[tuple[float, float]]:
    """(1/delta^2, measured normalised discrepancy at order t) per d.

    Measured in double-double so the decay stays visible far below the
    double rounding floor; epsilon is set to eps_fraction * delta.
    """
    pts = []
    for d in d_values:
        delta = 4.0 * math.sqrt(math.log(1.0 / zeta)) / d
        eps = eps_fraction * delta
        disc = comb_moment_discrepancies(delta, eps, t, normalized=True)[t]
        pts.append((1.0 / delta**2, disc))
    return pts


@dataclass(frozen=True)
class ChiSquare:
    closed_form: float
    quadrature: float


def chi_square_vs_gaussian(measure: PiecewiseGaussianMeasure) -> ChiSquare:
    """chi^2(measure, N(0,1)) two ways.

    Closed form per piece: the ratio G(x+h)^2/G(x) integrates to
    exp(h^2) * [Phi(b+2h) - Phi(a+2h)], so

        chi^2 = (1/Z^2) * sum_i s_i^2 exp(h_i^2) (Phi(b_i+2h_i) - Phi(a_i+2h_i)) - 1.

    For an unshifted measure this collapses to s/Z - 1.  The quadrature
    value integrates density^2 / G numerically per piece (independent route).
    """
    z = measure.z
    closed_terms = (
        np.square(measure.scale)
        * np.exp(np.square(measure.shift))
        * phi_mass(measure.a + 2.0 * measure.shift, measure.b + 2.0 * measure.shift)
    )
    closed = math.fsum(closed_terms.tolist()) / z**2 - 1.0

    vals = []
    for i in range(len(measure.a)):
        s, h = measure.scale[i], measure.shift[i]

        def f(x, s=s, h=h):
            g = float(gaussian_pdf(x))
            if g == 0.0:  # both densities underflow together far in the tail
                return 0.0
            return (s * float(gaussian_pdf(x + h)) / z) ** 2 / g

        v, _ = quad(f, measure.a[i], measure.b[i], epsabs=1e-13, epsrel=1e-13, limit=200)
        vals.append(v)
    quadrature = math.fsum(vals) - 1.0
    return ChiSquare(closed_form=closed, quadrature=quadrature)


@dataclass(frozen=True)
class MomentReport:
    """Moments of A, B and the Gaussian up to order k, with the explicit
    shift bound 4 eps (2 + 8 sqrt(log(1/zeta)))^t per order."""

    k: int
    moments_A: tuple[float, ...]
    moments_B: tuple[float, ...]
    moments_gaussian: tuple[float, ...]
    discrepancy_A: tuple[float, ...]
    discrepancy_B: tuple[float, ...]
    bound_AB: tuple[float, ...]
    fourier_bounds: tuple[float, ...]


def moment_discrepancy_report(pair: HardPair, k: int) -> MomentReport:
    """Moments up to order k plus every explicit bound, checked on the way out.

    Raises if |E B^t - E A^t| ever exceeds the shift bound beyond 1e-12
    arithmetic slack; that bound is fully explicit and must hold.
    """
    if k > K_MAX:
        raise MomentRangeError(f"k = {k} exceeds k_max = {K_MAX}")
    cfg = pair.config
    base = 2.0 + 8.0 * math.sqrt(math.log(1.0 / cfg.zeta))
    ma, mb, mg, da, db, bnd, fb = [], [], [], [], [], [], []
    for t in range(k + 1):
        ea = measure_moment(pair.A, t)
        eb = measure_moment(pair.B, t)
        eg = gaussian_moment(t)
        ma.append(ea)
        mb.append(eb)
        mg.append(eg)
        da.append(abs(ea - eg))
        db.append(abs(eb - eg))
        bound = 4.0 * cfg.epsilon * base**t
        bnd.append(bound)
        fb.append(fourier_discrepancy_bound(t, cfg.delta).total)
        slack = 1e-12 * max(1.0, abs(ea), abs(eb))
        if abs(eb - ea) > bound + slack:
            raise MassartForgeError(
                f"shift bound violated at t = {t}: |E B^t - E A^t| = "
                f"{abs(eb - ea):.6e} > {bound:.6e}"
            )
    return MomentReport(
        k=k,
        moments_A=tuple(ma),
        moments_B=tuple(mb),
        moments_gaussian=tuple(mg),
        discrepancy_A=tuple(da),
        discrepancy_B=tuple(db),
        bound_AB=tuple(bnd),
        fourier_bounds=tuple(fb),
    )
