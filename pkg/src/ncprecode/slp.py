"""Symbol-level precoders and the safety-margin geometry behind them.

The transmit vector is re-optimized for every symbol vector so multiuser
interference can be steered constructively. Pre-whitened variants place the
whitened noise-free point deep inside the PSK decision sector; the
transmit-only variants keep a confidence ellipse of the raw (non-circular)
noise inside the sector via separate upper/lower margin constraints; the
robust variant replaces the ellipse by its worst case over all unit-trace
jammer covariances, which is attained at rank-one covariances and searched
over a small grid of orientations.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEllipse, ZeroRow
from .noisegeom import ConfidenceEllipse, chi2_scale, effective_cov, rotated_cov, ellipse_from_cov
from .solver import QpProblem, solve_maximin, solve_min_norm
from .wlalg import expand_row, sqrt_inv_psd2

__all__ = [
    "MarginRows",
    "MarginTargets",
    "SlpSolution",
    "whitened_effective_channel",
    "safety_margin",
    "margin_rows",
    "margin_rows_pair",
    "pw_slp_minpower",
    "pw_slp_msm",
    "ellipse_margins",
    "tangent_points",
    "nc_slp",
    "worst_case_pterms",
    "robust_slp",
    "naive_slp",
]

_ROW_EPS = 1e-12


@dataclass(frozen=True)
class MarginRows:
    """Per-user constraint rows for the two PSK decision boundaries.

    a_minus bounds the distance to the upper boundary (positive imaginary
    side after de-rotation by the symbol phase), a_plus the lower one.
    """

    a_minus: np.ndarray
    a_plus: np.ndarray


@dataclass(frozen=True)
class MarginTargets:
    """Preset upper and lower safety margins, one pair per user."""

    delta_u0: np.ndarray
    delta_l0: np.ndarray

    def __post_init__(self):
        du = np.atleast_1d(np.asarray(self.delta_u0, dtype=float))
        dl = np.atleast_1d(np.asarray(self.delta_l0, dtype=float))
        if du.shape != dl.shape:
            raise ValueError("upper and lower target arrays must have equal length")
        if np.any(du < 0.0) or np.any(dl < 0.0):
            raise ValueError("margin targets must be nonnegative")
        object.__setattr__(self, "delta_u0", du)
        object.__setattr__(self, "delta_l0", dl)

    @classmethod
    def uniform(cls, delta: float, k: int) -> "MarginTargets":
        return cls(np.full(k, float(delta)), np.full(k, float(delta)))


@dataclass(frozen=True)
class SlpSolution:
    """Per-symbol transmit vector with its power and constraint slacks."""

    x: np.ndarray
    power: float
    achieved_margins: np.ndarray
    status: str = "solved"


def whitened_effective_channel(h_k, g_k, sigma_k: float):
    """Rows of gamma_k G_k^{-1/2} Hbar_k with gamma_k = sigma_k / sqrt(2).

    The scaling keeps the total whitened noise power equal to sigma_k^2, so
    the implied whitened noise has covariance (sigma_k^2 / 2) I2 and margin
    targets keep the same meaning as in the circular case.
    """
    gamma = sigma_k / math.sqrt(2.0)
    he = gamma * (sqrt_inv_psd2(g_k) @ expand_row(h_k))
    return he[0], he[1]


def safety_margin(s_k: complex, h_e, x, theta: float) -> float:
    """Signed distance of the noise-free point to the nearer decision boundary.

    Computed as Re{s* h x} sin(theta) - |Im{s* h x}| cos(theta) for a complex
    effective row h and transmit vector x.
    """
    z = complex(np.conj(s_k) * (np.asarray(h_e, dtype=complex) @ np.asarray(x, dtype=complex)))
    return z.real * math.sin(theta) - abs(z.imag) * math.cos(theta)


def margin_rows_pair(h_e1, h_e2, s_k: complex, theta: float) -> MarginRows:
    """Margin rows from a (first row, second row) real effective-channel pair."""
    s = complex(s_k)
    h_minus = s.real * np.asarray(h_e1) + s.imag * np.asarray(h_e2)
    h_plus = -s.imag * np.asarray(h_e1) + s.real * np.asarray(h_e2)
    sin_t, cos_t = math.sin(theta), math.cos(theta)
    return MarginRows(
        a_minus=h_minus * sin_t - h_plus * cos_t,
        a_plus=h_minus * sin_t + h_plus * cos_t,
    )


def margin_rows(h_k, s_k: complex, theta: float) -> MarginRows:
    """Margin rows built from a complex channel row and its intended symbol.

    With sh = s* h these are [Re sh, -Im sh] sin(theta) -/+ [Im sh, Re sh]
    cos(theta); a_minus @ xbar is exactly the upper-boundary distance
    Re{s* h x} sin(theta) - Im{s* h x} cos(theta).
    """
    hb = expand_row(h_k)
    return margin_rows_pair(hb[0], hb[1], s_k, theta)


def _check_rows(rows):
    for r in rows:
        if float(r @ r) <= _ROW_EPS ** 2 * max(1.0, r.size):
            raise ZeroRow("degenerate (zero) margin constraint row")


def _per_user(values, k: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 1:
        return np.full(k, arr[0])
    if arr.size != k:
        raise ValueError(f"expected {k} per-user values, got {arr.size}")
    return arr


def _min_power(rows, bounds) -> SlpSolution:
    a = np.vstack(rows)
    _check_rows(a)
    b = np.asarray(bounds, dtype=float)
    sol = solve_min_norm(QpProblem(a, b))
    return SlpSolution(
        x=sol.x,
        power=sol.objective,
        achieved_margins=a @ sol.x - b,
        status="solved",
    )


def _stacked_margin_rows(eff_channels, s, theta):
    """Interleaved (upper, lower) rows per user for a list of channel pairs."""
    rows = []
    for (h1, h2), sk in zip(eff_channels, np.ravel(np.asarray(s, dtype=complex))):
        mr = margin_rows_pair(h1, h2, sk, theta)
        rows.append(mr.a_minus)
        rows.append(mr.a_plus)
    return rows


def pw_slp_minpower(eff_channels, s, targets, theta: float) -> SlpSolution:
    """Minimum-power transmit vector meeting per-user margin targets.

    `eff_channels` is a sequence of (first row, second row) whitened pairs,
    `targets` the per-user preset margins applied to both boundaries.
    """
    rows = _stacked_margin_rows(eff_channels, s, theta)
    t = np.asarray(targets, dtype=float).ravel()
    bounds = np.repeat(t, 2)
    return _min_power(rows, bounds)


def pw_slp_msm(eff_channels, s, p_t: float, theta: float):
    """Maximize the smallest safety margin under a transmit power budget.

    Returns (solution, delta) where delta is the achieved common margin and
    the solution uses the full budget.
    """
    rows = np.vstack(_stacked_margin_rows(eff_channels, s, theta))
    _check_rows(rows)
    x, delta = solve_maximin(rows, p_t)
    return (
        SlpSolution(
            x=x,
            power=float(x @ x),
            achieved_margins=rows @ x - delta,
            status="solved",
        ),
        delta,
    )


def ellipse_margins(ellipse: ConfidenceEllipse, theta: float):
    """Distances from the ellipse center to the two bounding-box tangents.

    |delta_u| = sqrt(omega (lam1 sin^2(alpha - theta) + lam2 cos^2(alpha - theta)))
    and the lower analogue with alpha + theta. These are how far the noise
    can push the received point toward either decision boundary while staying
    inside the confidence ellipse.
    """
    lam1, lam2, alpha, omega = ellipse.lambda1, ellipse.lambda2, ellipse.alpha, ellipse.omega
    du = math.sqrt(omega * (lam1 * math.sin(alpha - theta) ** 2 + lam2 * math.cos(alpha - theta) ** 2))
    dl = math.sqrt(omega * (lam1 * math.sin(alpha + theta) ** 2 + lam2 * math.cos(alpha + theta) ** 2))
    return du, dl


def tangent_points(ellipse: ConfidenceEllipse, theta: float):
    """The four bounding-box tangency offsets relative to the ellipse center.

    Returns (upper+, upper-, lower+, lower-). The upper pair are the points
    where the tangent line is parallel to the upper decision boundary (slope
    tan theta); they are the support points of the ellipse along the unit
    normal n_u = (sin theta, -cos theta), at +/- sqrt(omega) G n / sqrt(n^T G n).
    A rank-one ellipse (lambda2 = 0) degenerates to a segment and both pairs
    collapse to its endpoints +/- sqrt(omega lambda1) along the major axis.
    """
    lam1, lam2, alpha, omega = ellipse.lambda1, ellipse.lambda2, ellipse.alpha, ellipse.omega
    if lam1 < 0.0 or lam2 < -1e-12:
        raise DegenerateEllipse("ellipse has a negative principal variance")
    v = np.array([math.cos(alpha), math.sin(alpha)])
    if lam2 <= 0.0:
        end = math.sqrt(omega * max(lam1, 0.0)) * v
        return end, -end, end.copy(), -end
    vp = np.array([-v[1], v[0]])
    g = lam1 * np.outer(v, v) + lam2 * np.outer(vp, vp)

    def support(nvec):
        gn = g @ nvec
        return math.sqrt(omega / float(nvec @ gn)) * gn

    pu = support(np.array([math.sin(theta), -math.cos(theta)]))
    pl = support(np.array([math.sin(theta), math.cos(theta)]))
    return pu, -pu, pl, -pl


def nc_slp(channels, h_j, jam, awgn_vars, s, targets: MarginTargets, p: float, theta: float) -> SlpSolution:
    """Transmit-only non-circular SLP: minimum power with ellipse-aware bounds.

    For each user the effective-noise covariance is rotated by the symbol
    phase, its confidence ellipse at level p gives the upper/lower margin
    terms, and the transmit vector solves the resulting min-power QP with two
    constraints per user. No receiver processing is assumed.
    """
    h = np.atleast_2d(np.asarray(channels, dtype=complex))
    k = h.shape[0]
    awgn = _per_user(awgn_vars, k)
    s = np.ravel(np.asarray(s, dtype=complex))
    cos_t = math.cos(theta)
    rows, bounds = [], []
    for idx in range(k):
        mr = margin_rows(h[idx], s[idx], theta)
        g = effective_cov(np.ravel(h_j)[idx], jam, awgn[idx])
        ell = ellipse_from_cov(rotated_cov(g, s[idx]), p)
        du, dl = ellipse_margins(ell, theta)
        rows.append(mr.a_minus)
        rows.append(mr.a_plus)
        bounds.append(targets.delta_u0[idx] * cos_t + du)
        bounds.append(targets.delta_l0[idx] * cos_t + dl)
    return _min_power(rows, bounds)


def worst_case_pterms(alpha_check: float, theta: float, jam_power: float, awgn_var: float):
    """Endpoint maxima of the squared margin terms over rank-one covariances.

    With the jammer power split lam1 + lam2 = 1 the squared upper margin term
    is linear in lam1, so its maximum sits at lam1 in {1, 0}:

      p_u1 = jam_power sin^2(alpha_check - theta) + awgn_var / 2
      p_u2 = jam_power cos^2(alpha_check - theta) + awgn_var / 2

    and analogously p_l1 / p_l2 with alpha_check + theta. jam_power is the
    received jammer power rho^2 |h_jk|^2, awgn_var the AWGN variance.
    """
    half = 0.5 * awgn_var
    p_u1 = jam_power * math.sin(alpha_check - theta) ** 2 + half
    p_u2 = jam_power * math.cos(alpha_check - theta) ** 2 + half
    p_l1 = jam_power * math.sin(alpha_check + theta) ** 2 + half
    p_l2 = jam_power * math.cos(alpha_check + theta) ** 2 + half
    return p_u1, p_u2, p_l1, p_l2


def _robust_bounds(h_j, jammer_power, awgn, s, targets, omega, theta, phi):
    """Constraint bounds of the worst-case QP for one covariance orientation."""
    cos_t = math.cos(theta)
    bounds = []
    for idx in range(len(s)):
        hj = complex(np.ravel(h_j)[idx])
        alpha_check = phi + cmath.phase(hj) - cmath.phase(complex(s[idx]))
        jp = jammer_power * abs(hj) ** 2
        p_u1, p_u2, p_l1, p_l2 = worst_case_pterms(alpha_check, theta, jp, awgn[idx])
        root = math.sqrt(omega)
        bounds.extend(
            [
                targets.delta_u0[idx] * cos_t + root * math.sqrt(p_u1),
                targets.delta_u0[idx] * cos_t + root * math.sqrt(p_u2),
                targets.delta_l0[idx] * cos_t + root * math.sqrt(p_l1),
                targets.delta_l0[idx] * cos_t + root * math.sqrt(p_l2),
            ]
        )
    return np.asarray(bounds)


def robust_slp(
    channels,
    h_j,
    jammer_power: float,
    awgn_vars,
    s,
    targets: MarginTargets,
    p: float,
    theta: float,
    n_div: int = 16,
    conservative: bool = False,
) -> SlpSolution:
    """Worst-case SLP against an unknown jammer covariance.

    Only rank-one covariances can attain the worst case, so their eigenvector
    orientation phi is swept over n_div points in (0, pi]. Each orientation
    yields four constraint bounds per user; by default the per-orientation QP
    with the largest optimal power is returned. With conservative=True a
    single QP is solved whose bounds are the elementwise maxima over all
    orientations, so the one returned vector satisfies every sampled
    orientation simultaneously.
    """
    if n_div < 1:
        raise ValueError("n_div must be at least 1")
    h = np.atleast_2d(np.asarray(channels, dtype=complex))
    k = h.shape[0]
    awgn = _per_user(awgn_vars, k)
    s = np.ravel(np.asarray(s, dtype=complex))
    omega = chi2_scale(p)
    rows = []
    for idx in range(k):
        mr = margin_rows(h[idx], s[idx], theta)
        rows.extend([mr.a_minus, mr.a_minus, mr.a_plus, mr.a_plus])
    phis = [n * math.pi / n_div for n in range(1, n_div + 1)]
    all_bounds = [
        _robust_bounds(h_j, jammer_power, awgn, s, targets, omega, theta, phi) for phi in phis
    ]
    if conservative:
        return _min_power(rows, np.max(np.vstack(all_bounds), axis=0))
    best = None
    for bounds in all_bounds:
        sol = _min_power(rows, bounds)
        if best is None or sol.power > best.power:
            best = sol
    return best


def naive_slp(channels, h_j, jammer_power: float, awgn_vars, s, targets: MarginTargets, p: float, theta: float) -> SlpSolution:
    """SLP that ignores non-circularity: circular noise of the same total power.

    Runs the transmit-only pipeline with G_k replaced by (sigma_k^2 / 2) I,
    sigma_k^2 = jammer_power |h_jk|^2 + awgn_var_k, so the margins depend only
    on the total effective-noise power.
    """
    h = np.atleast_2d(np.asarray(channels, dtype=complex))
    k = h.shape[0]
    awgn = _per_user(awgn_vars, k)
    s = np.ravel(np.asarray(s, dtype=complex))
    omega = chi2_scale(p)
    cos_t = math.cos(theta)
    rows, bounds = [], []
    for idx in range(k):
        mr = margin_rows(h[idx], s[idx], theta)
        sigma2 = jammer_power * abs(complex(np.ravel(h_j)[idx])) ** 2 + awgn[idx]
        margin = math.sqrt(omega * 0.5 * sigma2)
        rows.append(mr.a_minus)
        rows.append(mr.a_plus)
        bounds.append(targets.delta_u0[idx] * cos_t + margin)
        bounds.append(targets.delta_l0[idx] * cos_t + margin)
    return _min_power(rows, bounds)
