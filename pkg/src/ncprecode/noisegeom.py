"""Jammer and effective-noise statistics.

Builds the per-user effective noise covariance (jamming plus AWGN), its
symbol-rotated variant, confidence ellipses for a preset containment
probability, and draws noise samples consistent with those statistics.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEllipse, InfeasibleQ, InvalidConfidence
from .wlalg import SymMat2, eig2_sym, expand_row, symbol_rotation

__all__ = [
    "JammerModel",
    "ConfidenceEllipse",
    "NoisePowers",
    "CIRCULAR_Q",
    "q_from_elements",
    "q_rank_one",
    "t_from_q",
    "jammer_model",
    "effective_cov",
    "rotated_cov",
    "chi2_scale",
    "ellipse_from_cov",
    "sample_noise",
    "noise_powers",
]

CIRCULAR_Q = SymMat2(0.5, 0.0, 0.5)


@dataclass(frozen=True)
class JammerModel:
    """Single-antenna jammer: amplitude rho and unit-trace covariance Q = T T^T."""

    rho: float
    q: SymMat2
    t_factor: np.ndarray

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError("jammer amplitude must be nonnegative")
        if abs(self.q.trace() - 1.0) > 1e-12:
            raise ValueError("jammer covariance must have unit trace")


@dataclass(frozen=True)
class ConfidenceEllipse:
    """Level set of a bivariate Gaussian containing mass p.

    lambda1 >= lambda2 are the variances along the principal axes, alpha the
    major-axis orientation in [0, pi), omega the chi-square scale so that the
    boundary is {e : e^T G^-1 e = omega} around the center.
    """

    center: np.ndarray
    lambda1: float
    lambda2: float
    alpha: float
    omega: float


@dataclass(frozen=True)
class NoisePowers:
    """AWGN variance and total effective-noise power for one user."""

    awgn_var: float
    total_var: float


def q_from_elements(q11: float, q12: float) -> SymMat2:
    """Unit-trace covariance [[q11, q12], [q12, 1-q11]].

    The feasible region is the disk (q11 - 1/2)^2 + q12^2 <= 1/4 (PSD with
    trace one); the boundary circle holds the rank-one covariances.
    """
    if (q11 - 0.5) ** 2 + q12 ** 2 > 0.25 + 1e-12:
        raise InfeasibleQ(f"(q11, q12) = ({q11}, {q12}) is outside the feasible disk")
    return SymMat2(float(q11), float(q12), 1.0 - float(q11))


def q_rank_one(phi: float) -> SymMat2:
    """Maximally non-circular covariance v v^T with v = (cos phi, sin phi)."""
    c, s = math.cos(phi), math.sin(phi)
    return SymMat2(c * c, c * s, s * s)


def t_from_q(q: SymMat2) -> np.ndarray:
    """Symmetric PSD square root T with T T^T = Q (rank-one Q gives rank-one T)."""
    lam1, lam2, v = eig2_sym(q)
    if lam2 < -1e-12:
        raise InfeasibleQ("covariance is not positive semidefinite")
    lam1 = max(lam1, 0.0)
    lam2 = max(lam2, 0.0)
    vp = np.array([-v[1], v[0]])
    return math.sqrt(lam1) * np.outer(v, v) + math.sqrt(lam2) * np.outer(vp, vp)


def jammer_model(rho: float, q: SymMat2) -> JammerModel:
    """Build a JammerModel from amplitude and unit-trace covariance."""
    return JammerModel(rho=float(rho), q=q, t_factor=t_from_q(q))


def effective_cov(h_jk: complex, jam: JammerModel, awgn_var: float) -> SymMat2:
    """Effective noise covariance rho^2 Hj Q Hj^T + (awgn_var/2) I at one user.

    Its trace equals rho^2 |h_jk|^2 + awgn_var for every unit-trace Q.
    """
    hb = expand_row([h_jk])
    g = jam.rho ** 2 * (hb @ jam.q.as_array() @ hb.T)
    half = 0.5 * awgn_var
    return SymMat2(g[0, 0] + half, 0.5 * (g[0, 1] + g[1, 0]), g[1, 1] + half)


def rotated_cov(g: SymMat2, s: complex) -> SymMat2:
    """Covariance of the effective noise after de-rotating by the symbol phase.

    Conjugation by the orthogonal symbol rotation preserves eigenvalues.
    """
    sb = symbol_rotation(s)
    m = sb.T @ g.as_array() @ sb
    return SymMat2(m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1])


def chi2_scale(p: float) -> float:
    """Exact chi-square(2) quantile scale omega = -2 ln(1 - p)."""
    if not 0.0 < p < 1.0:
        raise InvalidConfidence(f"confidence level must be in (0, 1), got {p}")
    return -2.0 * math.log1p(-p)


def ellipse_from_cov(g_check: SymMat2, p: float, center=(0.0, 0.0)) -> ConfidenceEllipse:
    """Confidence ellipse of a bivariate Gaussian with covariance g_check.

    The orientation alpha is the major-axis angle, normalized into [0, pi);
    for a circular covariance alpha = 0 by convention.
    """
    omega = chi2_scale(p)
    lam1, lam2, v = eig2_sym(g_check)
    if lam2 < -1e-12:
        raise DegenerateEllipse("covariance has a negative principal variance")
    lam2 = max(lam2, 0.0)
    alpha = math.atan2(v[1], v[0])
    if alpha < 0.0:
        alpha += math.pi
    if alpha >= math.pi:
        alpha -= math.pi
    return ConfidenceEllipse(
        center=np.asarray(center, dtype=float),
        lambda1=lam1,
        lambda2=lam2,
        alpha=alpha,
        omega=omega,
    )


def sample_noise(rng, h_jk: complex, jam: JammerModel, awgn_var: float, size=None):
    """Draw effective-noise samples Hj (rho T v) + n with v ~ N(0, I2).

    Returns shape (2,) for size=None, else (size, 2). The AWGN part has
    covariance (awgn_var/2) I2.
    """
    hb = expand_row([h_jk])
    mix = (jam.rho * hb @ jam.t_factor).T  # right-multiplying mixer
    std = math.sqrt(0.5 * awgn_var)
    if size is None:
        v = rng.standard_normal(2)
        return v @ mix + std * rng.standard_normal(2)
    v = rng.standard_normal((size, 2))
    return v @ mix + std * rng.standard_normal((size, 2))


def noise_powers(h_jk: complex, jam: JammerModel, awgn_var: float) -> NoisePowers:
    """AWGN variance and total effective-noise power rho^2 |h_jk|^2 + awgn_var."""
    total = jam.rho ** 2 * abs(complex(h_jk)) ** 2 + awgn_var
    return NoisePowers(awgn_var=float(awgn_var), total_var=float(total))
