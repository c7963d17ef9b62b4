"""
One-dimensional Gaussian machinery.
Quantiles, CDF, the 1-D cross-entropy and the constrained MLE whose
leakage across the boundary {0} is capped at alpha.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy.special import ndtr

from .errors import DegenerateClusterError, InputError


LN_2PI = math.log(2.0 * math.pi)

# Rational approximation coefficients for the standard normal quantile (Acklam)
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


@dataclass(frozen=True)
class Moments1D:
    """Sample mean, biased standard deviation and size of 1-D data."""

    mean: float
    std: float
    count: int = 1

    def __post_init__(self):
        if self.std < 0.0:
            raise InputError("Standard deviation must be nonnegative", {"std": self.std})


@dataclass(frozen=True)
class ConstrainedGaussian1D:
    """
    A 1-D Gaussian N(mean, std) fitted under the leakage constraint.

    p_alpha is the quantile the fit was checked against (0 when the
    constraint is vacuous) and constrained tells whether the closed-form
    boundary solution was used instead of the plain MLE.
    """

    mean: float
    std: float
    p_alpha: float = 0.0
    constrained: bool = False

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "p_alpha": self.p_alpha,
            "constrained": self.constrained,
        }


def _acklam_lower(p: float) -> float:
    """Initial Phi^-1(p) from the rational approximation, about 1e-9 relative."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    q = math.sqrt(-2.0 * math.log(1.0 - p))
    return -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
        ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)


@lru_cache(maxsize=256)
def quantile_upper(alpha: float) -> float:
    """
    Upper standard-normal quantile p^alpha = Phi^-1(1 - alpha).

    Computed as -Phi^-1(alpha) so small tails keep full relative precision,
    then refined by one Halley step against the CDF.

    Args:
        alpha: Tail probability in (0, 1)

    Returns:
        p^alpha (absolute error below 1e-9)
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie strictly between 0 and 1", {"alpha": alpha})
    if alpha == 0.5:
        return 0.0
    z = _acklam_lower(alpha)
    error = float(ndtr(z)) - alpha
    u = error * math.sqrt(2.0 * math.pi) * math.exp(0.5 * z * z)
    z = z - u / (1.0 + 0.5 * z * u)
    return -z


def normal_cdf(x: float, mean: float = 0.0, std: float = 1.0) -> float:
    """Phi((x - mean) / std)."""
    if not std > 0.0:
        raise InputError("Standard deviation must be positive", {"std": std})
    return float(ndtr((x - mean) / std))


def cross_entropy_1d(mom: Moments1D, mean: float, std: float) -> float:
    """
    Cross-entropy (nats) of data with moments mom against N(mean, std):
    0.5 * ((s^2 + (mean - m)^2) / std^2 + ln(std^2) + ln(2 pi)).
    """
    if not std > 0.0:
        raise InputError("Standard deviation must be positive", {"std": std})
    variance = std * std
    return 0.5 * ((mom.std * mom.std + (mean - mom.mean) ** 2) / variance
                  + math.log(variance) + LN_2PI)


def unconstrained_mle(mom: Moments1D) -> ConstrainedGaussian1D:
    """Plain maximum likelihood fit (the CEC model)."""
    if not mom.std > 0.0:
        raise DegenerateClusterError("Coordinate-1 variance is zero")
    return ConstrainedGaussian1D(mean=mom.mean, std=mom.std, p_alpha=0.0, constrained=False)


def constrained_mle(mom: Moments1D, alpha: float) -> ConstrainedGaussian1D:
    """
    Cross-entropy minimizer over N(m, s) subject to |m| >= p^alpha * s.

    The sample moments are returned when they already satisfy the
    constraint; otherwise the minimizer lies on the constraint boundary:
        m = (-p^2 m_X + sign(m_X) p sqrt((p^2 + 4) m_X^2 + 4 s_X^2)) / 2
        s = |m| / p
    with sign(0) taken as +1.

    Args:
        mom: Moments of the data along the boundary normal
        alpha: Leakage level in (0, 1); values >= 0.5 leave the fit unconstrained

    Returns:
        ConstrainedGaussian1D with its constraint flag
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie strictly between 0 and 1", {"alpha": alpha})
    if not mom.std > 0.0:
        raise DegenerateClusterError("Coordinate-1 variance is zero")
    if alpha >= 0.5:
        return unconstrained_mle(mom)

    p = quantile_upper(alpha)
    m_x, s_x = mom.mean, mom.std
    if abs(m_x) >= p * s_x:
        return ConstrainedGaussian1D(mean=m_x, std=s_x, p_alpha=p, constrained=False)

    sign = 1.0 if m_x >= 0.0 else -1.0
    p2 = p * p
    mean = 0.5 * (-p2 * m_x + sign * p * math.sqrt((p2 + 4.0) * m_x * m_x + 4.0 * s_x * s_x))
    return ConstrainedGaussian1D(mean=mean, std=abs(mean) / p, p_alpha=p, constrained=True)


def leakage_of(g) -> float:
    """Mass a 1-D Gaussian places on the far side of {0}: min(Phi(0), 1 - Phi(0))."""
    if not g.std > 0.0:
        raise InputError("Standard deviation must be positive", {"std": g.std})
    # ndtr(-|m|/s) is the smaller tail without cancellation
    return float(ndtr(-abs(g.mean) / g.std))


def asymptotic_mean(mom: Moments1D) -> float:
    """Limit of the constrained mean as alpha -> 0: m_X + s_X^2 / m_X."""
    if mom.mean == 0.0:
        raise InputError("The small-alpha limit needs a nonzero mean")
    return mom.mean + mom.std * mom.std / mom.mean
