"""Bivariate copula families: densities, h-functions, fitting, testing.

Implemented families: independence, Gaussian, Student-t, Clayton, Gumbel,
Frank. The asymmetric Archimedean families (Clayton, Gumbel) come with 90,
180 and 270 degree rotations so both tails and negative dependence are
covered; the other families handle negative dependence through their
parameter sign.

The h-function of a copula is the conditional distribution
``h(u|v) = dC(u,v)/dv``; together with its inverse it powers pseudo-
observation construction for higher vine trees and inverse-Rosenblatt
sampling.

Evaluation entry points clip arguments into [1e-10, 1 - 1e-10]: rank-based
data legitimately approaches the boundary, and the clip keeps log-densities
finite there. Arguments outside the closed unit interval raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, stats

from .errors import ContractError, NumericError

EPS = 1e-10

FAMILIES = ("independence", "gaussian", "studentt", "clayton", "gumbel", "frank")
ROTATABLE = ("clayton", "gumbel")
DEFAULT_FAMILIES = ("gaussian", "studentt", "clayton", "gumbel", "frank")

STUDENT_NU_MAX = 30.0
STUDENT_NU_MIN = 2.05
PARAM_BOUNDS = {
    "gaussian": (-0.9999, 0.9999),
    "clayton": (1e-4, 28.0),
    "gumbel": (1.0, 20.0),
    "frank": (-35.0, 35.0),
}


def _clip(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ContractError("copula arguments must lie in the unit interval")
    return np.clip(x, EPS, 1.0 - EPS)


def _validate_params(family, params, rotation):
    if family not in FAMILIES:
        raise ContractError(f"unknown family {family!r}")
    if rotation not in (0, 90, 180, 270):
        raise ContractError(f"rotation must be one of 0/90/180/270, got {rotation}")
    if rotation and family not in ROTATABLE:
        raise ContractError(f"{family} has no rotations (its parameter sign "
                            "already covers negative dependence)")
    if family == "independence":
        if params:
            raise ContractError("the independence copula carries no parameters")
        return
    if family == "studentt":
        if len(params) != 2:
            raise ContractError("studentt needs (rho, nu)")
        rho, nu = params
        if not -1.0 < rho < 1.0:
            raise ContractError(f"studentt rho must lie in (-1, 1), got {rho}")
        if not nu > 2.0:
            raise ContractError(f"studentt nu must exceed 2, got {nu}")
        return
    if len(params) != 1:
        raise ContractError(f"{family} takes exactly one parameter")
    theta = params[0]
    if family == "gaussian" and not -1.0 < theta < 1.0:
        raise ContractError(f"gaussian rho must lie in (-1, 1), got {theta}")
    if family == "clayton" and not theta > 0.0:
        raise ContractError(f"clayton theta must be positive, got {theta}")
    if family == "gumbel" and not theta >= 1.0:
        raise ContractError(f"gumbel theta must be >= 1, got {theta}")
    if family == "frank" and theta == 0.0:
        raise ContractError("frank theta must be nonzero")


# ---------------------------------------------------------------------------
# Base-family implementations (rotation 0), vectorized over ndarrays
# ---------------------------------------------------------------------------

def _gauss_logpdf(u, v, rho):
    x, y = stats.norm.ppf(u), stats.norm.ppf(v)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) + (2 * rho * x * y - rho * rho * (x * x + y * y)) / (2 * r2)


def _gauss_h(u, v, rho):
    x, y = stats.norm.ppf(u), stats.norm.ppf(v)
    return stats.norm.cdf((x - rho * y) / math.sqrt(1.0 - rho * rho))


def _gauss_hinv(p, v, rho):
    y = stats.norm.ppf(v)
    return stats.norm.cdf(stats.norm.ppf(p) * math.sqrt(1.0 - rho * rho) + rho * y)


def _student_logpdf(u, v, rho, nu):
    x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
    r2 = 1.0 - rho * rho
    quad = (x * x - 2 * rho * x * y + y * y) / r2
    return (math.lgamma((nu + 2) / 2) + math.lgamma(nu / 2)
            - 2 * math.lgamma((nu + 1) / 2) - 0.5 * math.log(r2)
            - (nu + 2) / 2 * np.log1p(quad / nu)
            + (nu + 1) / 2 * (np.log1p(x * x / nu) + np.log1p(y * y / nu)))


def _student_h(u, v, rho, nu):
    x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return stats.t.cdf((x - rho * y) / scale, nu + 1.0)


def _student_hinv(p, v, rho, nu):
    y = stats.t.ppf(v, nu)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return stats.t.cdf(stats.t.ppf(p, nu + 1.0) * scale + rho * y, nu)


def _clayton_logpdf(u, v, theta):
    lu, lv = np.log(u), np.log(v)
    s = np.exp(-theta * lu) + np.exp(-theta * lv) - 1.0
    return (math.log1p(theta) - (theta + 1.0) * (lu + lv)
            - (2.0 + 1.0 / theta) * np.log(s))


def _clayton_h(u, v, theta):
    s = u ** (-theta) + v ** (-theta) - 1.0
    return np.exp(-(theta + 1.0) * np.log(v) - (1.0 + 1.0 / theta) * np.log(s))


def _clayton_hinv(p, v, theta):
    # u = [1 + v^-theta * (p^(-theta/(theta+1)) - 1)]^(-1/theta), arranged so
    # no large terms cancel (expm1/log1p keep precision for extreme theta).
    t = np.expm1(-theta / (theta + 1.0) * np.log(p)) * v ** (-theta)
    return np.exp(-np.log1p(t) / theta)


def _gumbel_logpdf(u, v, theta):
    lx, ly = -np.log(u), -np.log(v)
    s = lx ** theta + ly ** theta
    root = s ** (1.0 / theta)
    return (-root + lx + ly + (theta - 1.0) * (np.log(lx) + np.log(ly))
            + (1.0 / theta - 2.0) * np.log(s) + np.log(root + theta - 1.0))


def _gumbel_h(u, v, theta):
    lx, ly = -np.log(u), -np.log(v)
    s = lx ** theta + ly ** theta
    return np.exp(-s ** (1.0 / theta) + (theta - 1.0) * np.log(ly)
                  + (1.0 / theta - 1.0) * np.log(s)) / v


def _gumbel_hinv(p, v, theta, tol_bits=60):
    """Numeric inverse of the Gumbel h-function (monotone bisection)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    lo = np.full(np.broadcast(p, v).shape, EPS)
    hi = np.full_like(lo, 1.0 - EPS)
    for _ in range(tol_bits):
        mid = 0.5 * (lo + hi)
        too_low = _gumbel_h(mid, v, theta) < p
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
    return 0.5 * (lo + hi)


def _frank_logpdf(u, v, theta):
    if abs(theta) < 1e-6:
        return np.zeros(np.broadcast(u, v).shape)
    g = -math.expm1(-theta)
    gu, gv = -np.expm1(-theta * u), -np.expm1(-theta * v)
    return (math.log(theta * g) - theta * (u + v)
            - 2.0 * np.log(np.abs(g - gu * gv)))


def _frank_h(u, v, theta):
    if abs(theta) < 1e-6:
        return np.asarray(u, dtype=float)
    au, av = np.expm1(-theta * u), np.expm1(-theta * v)
    big_a = math.expm1(-theta)
    return np.exp(-theta * v) * au / (big_a + au * av)


def _frank_hinv(p, v, theta):
    if abs(theta) < 1e-6:
        return np.asarray(p, dtype=float)
    av = np.expm1(-theta * v)
    big_a = math.expm1(-theta)
    au = p * big_a / (1.0 + av * (1.0 - p))
    return -np.log1p(au) / theta


def _frank_tau(theta):
    if abs(theta) < 1e-8:
        return 0.0
    t = abs(theta)
    debye, _ = integrate.quad(lambda s: s / math.expm1(s), 0.0, t)
    tau = 1.0 - 4.0 / t * (1.0 - debye / t)
    return math.copysign(tau, theta)


@dataclass(frozen=True)
class PairCopula:
    """A bivariate copula: family tag, parameters and optional rotation.

    ``h(u, v)`` is the conditional distribution of the first argument given
    the second; ``h_inverse`` undoes it in the first argument.
    """

    family: str
    params: tuple = ()
    rotation: int = 0

    def __post_init__(self):
        params = tuple(float(t) for t in self.params)
        object.__setattr__(self, "params", params)
        _validate_params(self.family, params, self.rotation)

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def label(self) -> str:
        return self.family if not self.rotation else f"{self.family}_{self.rotation}"

    def _rotate_args(self, u, v):
        if self.rotation == 90:
            return 1.0 - u, v
        if self.rotation == 180:
            return 1.0 - u, 1.0 - v
        if self.rotation == 270:
            return u, 1.0 - v
        return u, v

    def log_density(self, u, v):
        u, v = self._rotate_args(_clip(u), _clip(v))
        if self.family == "independence":
            return np.zeros(np.broadcast(u, v).shape)
        if self.family == "gaussian":
            return _gauss_logpdf(u, v, *self.params)
        if self.family == "studentt":
            return _student_logpdf(u, v, *self.params)
        if self.family == "clayton":
            return _clayton_logpdf(u, v, *self.params)
        if self.family == "gumbel":
            return _gumbel_logpdf(u, v, *self.params)
        return _frank_logpdf(u, v, *self.params)

    def density(self, u, v):
        return np.exp(self.log_density(u, v))

    def h(self, u, v):
        """h(u | v) = dC(u, v)/dv, the conditional CDF of u given v."""
        u, v = _clip(u), _clip(v)
        if self.family == "independence":
            return u + np.zeros(np.broadcast(u, v).shape)
        if self.rotation == 90:
            return 1.0 - self._base_h(1.0 - u, v)
        if self.rotation == 180:
            return 1.0 - self._base_h(1.0 - u, 1.0 - v)
        if self.rotation == 270:
            return self._base_h(u, 1.0 - v)
        return self._base_h(u, v)

    def _base_h(self, u, v):
        if self.family == "gaussian":
            return _gauss_h(u, v, *self.params)
        if self.family == "studentt":
            return _student_h(u, v, *self.params)
        if self.family == "clayton":
            return _clayton_h(u, v, *self.params)
        if self.family == "gumbel":
            return _gumbel_h(u, v, *self.params)
        return _frank_h(u, v, *self.params)

    def h_inverse(self, p, v):
        """The u with h(u | v) = p."""
        p, v = _clip(p), _clip(v)
        if self.family == "independence":
            return p + np.zeros(np.broadcast(p, v).shape)
        if self.rotation == 90:
            out = 1.0 - self._base_hinv(1.0 - p, v)
        elif self.rotation == 180:
            out = 1.0 - self._base_hinv(1.0 - p, 1.0 - v)
        elif self.rotation == 270:
            out = self._base_hinv(p, 1.0 - v)
        else:
            out = self._base_hinv(p, v)
        return np.clip(out, EPS, 1.0 - EPS)

    def _base_hinv(self, p, v):
        if self.family == "gaussian":
            return _gauss_hinv(p, v, *self.params)
        if self.family == "studentt":
            return _student_hinv(p, v, *self.params)
        if self.family == "clayton":
            return _clayton_hinv(p, v, *self.params)
        if self.family == "gumbel":
            return _gumbel_hinv(p, v, *self.params)
        return _frank_hinv(p, v, *self.params)

    def _swapped(self) -> "PairCopula":
        # Conditioning on the first coordinate of a 90/270 rotation matches
        # conditioning on the second coordinate of the opposite rotation;
        # symmetric families (and 0/180 rotations) are exchangeable as-is.
        if self.rotation in (90, 270):
            return PairCopula(self.family, self.params, 360 - self.rotation)
        return self

    def h_second(self, v, u):
        """h(v | u) in the other direction: conditional CDF of the second
        coordinate given the first."""
        return self._swapped().h(v, u)

    def h_second_inverse(self, p, u):
        """The v with h_second(v | u) = p."""
        return self._swapped().h_inverse(p, u)

    def tau(self) -> float:
        """Population Kendall tau of this copula."""
        sign = -1.0 if self.rotation in (90, 270) else 1.0
        if self.family == "independence":
            return 0.0
        if self.family in ("gaussian", "studentt"):
            return sign * 2.0 * math.asin(self.params[0]) / math.pi
        theta = self.params[0]
        if self.family == "clayton":
            return sign * theta / (theta + 2.0)
        if self.family == "gumbel":
            return sign * (1.0 - 1.0 / theta)
        return sign * _frank_tau(theta)


INDEPENDENCE = PairCopula("independence")


def sample_pair(copula: PairCopula, n: int, seed: int) -> tuple:
    """Draw n dependent pairs via conditional inversion: v, w ~ U(0,1),
    u = h_inverse(w | v)."""
    rng = np.random.default_rng(seed)
    v = rng.uniform(size=n)
    w = rng.uniform(size=n)
    return np.asarray(copula.h_inverse(w, v)), v


# ---------------------------------------------------------------------------
# Dependence measures, testing, fitting
# ---------------------------------------------------------------------------

def kendall_tau(u, v) -> float:
    """Sample Kendall's tau with tie correction."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ContractError("kendall_tau expects two equal-length vectors")
    if u.size < 2:
        raise ContractError(f"need at least 2 observations, got {u.size}")
    return float(stats.kendalltau(u, v).statistic)


def independence_test(u, v, alpha: float = 0.05) -> bool:
    """Asymptotic Kendall-tau independence test.

    Returns True when independence is *retained* at level ``alpha`` (i.e.
    the statistic ``|tau| * sqrt(9n(n-1) / (2(2n+5)))`` does not exceed the
    standard-normal quantile).
    """
    u = np.asarray(u, dtype=float)
    if u.size < 10:
        raise ContractError(f"independence test needs n >= 10, got {u.size}")
    if not 0.0 <= alpha < 1.0:
        raise ContractError(f"alpha must lie in [0, 1), got {alpha}")
    n = u.size
    tau = kendall_tau(u, v)
    statistic = abs(tau) * math.sqrt(9.0 * n * (n - 1) / (2.0 * (2.0 * n + 5.0)))
    return bool(statistic <= stats.norm.ppf(1.0 - alpha / 2.0))


def tau_init(family: str, tau: float) -> float:
    """Closed-form parameter guess from a tau estimate, where one exists."""
    t = min(abs(tau), 0.93)
    if family == "gaussian":
        return math.sin(math.pi * np.clip(tau, -0.99, 0.99) / 2.0)
    if family == "clayton":
        return max(2.0 * t / (1.0 - t), PARAM_BOUNDS["clayton"][0])
    if family == "gumbel":
        return max(1.0 / (1.0 - t), 1.0)
    raise ContractError(f"no closed-form tau inversion for {family}")


@dataclass(frozen=True)
class PairCopulaFit:
    """Outcome of per-pair family selection."""

    copula: PairCopula
    loglik: float
    aic: float
    bic: float
    failures: tuple = ()


def _fit_candidate(family, rotation, u, v, tau_hat):
    """Maximum-likelihood fit of one (family, rotation) candidate."""
    n = u.size

    if family == "independence":
        return PairCopula("independence"), 0.0

    if family == "gaussian":
        # Profile the likelihood on cached probit scores; much faster than
        # re-evaluating ppf inside the optimizer.
        x, y = stats.norm.ppf(u), stats.norm.ppf(v)
        sxx = float(x @ x + y @ y)
        sxy = float(x @ y)

        def negll_rho(r):
            r2 = 1.0 - r * r
            return 0.5 * n * math.log(r2) - (2 * r * sxy - r * r * sxx) / (2 * r2)

        res = optimize.minimize_scalar(negll_rho, bounds=PARAM_BOUNDS["gaussian"],
                                       method="bounded", options={"xatol": 1e-6})
        cop = PairCopula("gaussian", (float(res.x),))
        return cop, float(cop.log_density(u, v).sum())

    def negll_1p(theta):
        ll = PairCopula(family, (theta,), rotation).log_density(u, v).sum()
        return -ll if np.isfinite(ll) else 1e300

    if family == "studentt":
        # Profile out rho at each trial nu: with the t-scores cached, the
        # only rho-dependent terms are the correlation normalizer and the
        # joint quadratic form, so the inner search is plain arithmetic and
        # the expensive t quantile transform runs once per nu.
        rho_bounds = PARAM_BOUNDS["gaussian"]

        def profiled(nu):
            x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
            sq = x * x + y * y
            xy = x * y

            def negll_rho(r):
                r2 = 1.0 - r * r
                return (0.5 * n * math.log(r2)
                        + (nu + 2.0) / 2.0
                        * float(np.log1p((sq - 2.0 * r * xy) / (nu * r2)).sum()))

            res = optimize.minimize_scalar(negll_rho, bounds=rho_bounds,
                                           method="bounded",
                                           options={"xatol": 1e-6})
            # Add back the rho-free terms so different nu are comparable.
            const = (math.lgamma((nu + 2) / 2) + math.lgamma(nu / 2)
                     - 2 * math.lgamma((nu + 1) / 2))
            marginals = float((np.log1p(x * x / nu) + np.log1p(y * y / nu)).sum())
            full = negll_rho(float(res.x)) - n * const - (nu + 1.0) / 2.0 * marginals
            return float(res.x), full

        # A 0.01 resolution on the degrees of freedom is far below their
        # statistical uncertainty and keeps the outer search short.
        res_nu = optimize.minimize_scalar(
            lambda m: profiled(m)[1],
            bounds=(STUDENT_NU_MIN, STUDENT_NU_MAX), method="bounded",
            options={"xatol": 1e-2})
        nu = float(res_nu.x)
        rho, _ = profiled(nu)
        cop = PairCopula("studentt", (rho, nu))
        return cop, float(cop.log_density(u, v).sum())

    bounds = PARAM_BOUNDS[family]
    res = optimize.minimize_scalar(negll_1p, bounds=bounds, method="bounded",
                                   options={"xatol": 1e-6})
    theta = float(res.x)
    if family == "frank" and abs(theta) < 1e-6:
        theta = math.copysign(1e-6, tau_hat if tau_hat else 1.0)
    cop = PairCopula(family, (theta,), rotation)
    ll = float(cop.log_density(u, v).sum())
    if not np.isfinite(ll):
        raise NumericError(f"non-finite log-likelihood for {cop.label}")
    return cop, ll


def fit_pair(u, v, families=DEFAULT_FAMILIES, criterion: str = "aic") -> PairCopulaFit:
    """Fit every candidate family and return the criterion-best copula.

    Rotations of the asymmetric families are picked by the sign of the
    empirical tau: nonnegative tau tries 0/180 degrees, negative tau 90/270.
    Families whose optimization fails are recorded and skipped; if every
    candidate fails, a :class:`NumericError` is raised.
    """
    u = _clip(np.asarray(u, dtype=float))
    v = _clip(np.asarray(v, dtype=float))
    if u.size < 10:
        raise ContractError(f"pair fitting needs n >= 10, got {u.size}")
    if criterion not in ("aic", "bic"):
        raise ContractError(f"criterion must be 'aic' or 'bic', got {criterion!r}")
    if not families:
        raise ContractError("empty candidate family set")

    tau_hat = kendall_tau(u, v)
    candidates = []
    for family in families:
        if family not in FAMILIES:
            raise ContractError(f"unknown family {family!r}")
        if family in ROTATABLE:
            rotations = (0, 180) if tau_hat >= 0 else (90, 270)
            candidates.extend((family, rot) for rot in rotations)
        else:
            candidates.append((family, 0))

    n = u.size
    best = None
    failures = []
    for family, rotation in candidates:
        try:
            cop, ll = _fit_candidate(family, rotation, u, v, tau_hat)
        except (NumericError, FloatingPointError, ValueError) as exc:
            failures.append((family, rotation, str(exc)))
            continue
        aic = -2.0 * ll + 2.0 * cop.n_params
        bic = -2.0 * ll + math.log(n) * cop.n_params
        score = aic if criterion == "aic" else bic
        if best is None or score < best[0]:
            best = (score, cop, ll, aic, bic)
    if best is None:
        raise NumericError(
            f"every candidate family failed to fit: {failures!r}"
        )
    _, cop, ll, aic, bic = best
    return PairCopulaFit(cop, ll, aic, bic, tuple(failures))
