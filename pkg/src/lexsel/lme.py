"""Gaussian linear mixed-effects fitting by maximum likelihood.

Model: y = X beta + sum_g Z_g u_g + eps, with one independent random
intercept per grouping factor, u_g ~ N(0, s2_g I) and eps ~ N(0, s2 I).
For fixed variance components beta is profiled out by generalized least
squares, and the profile log-likelihood is maximized numerically over the
nonnegative orthant. Standard errors come from the GLS information matrix
(the beta block of the Fisher information); the reported p-value is the
two-sided Wald test of the last fixed effect against the standard normal.

Sample sizes here are small (tens to a few hundred rows), so all linear
algebra is dense.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import optimize, stats


class LMEError(ValueError):
    pass


class LMEConvergenceError(LMEError):
    """Optimizer failed; carries the best state found so far."""

    def __init__(self, message: str, best: "LMEFit | None" = None):
        super().__init__(message)
        self.best = best


@dataclass
class LMEFit:
    beta: np.ndarray
    se_beta: np.ndarray
    variance_components: dict[str, float]
    residual_variance: float
    loglik: float
    p_value: float
    z_value: float
    n_obs: int
    converged: bool = True

    @property
    def intercept(self) -> float:
        return float(self.beta[0])

    @property
    def effect(self) -> float:
        return float(self.beta[-1])

    @property
    def effect_se(self) -> float:
        return float(self.se_beta[-1])

    def wald_interval(self, level: float = 0.95) -> tuple[float, float]:
        z = stats.norm.ppf(0.5 + level / 2.0)
        return (self.effect - z * self.effect_se, self.effect + z * self.effect_se)


def _group_indicator(labels: Sequence) -> np.ndarray:
    levels = sorted(set(labels), key=lambda v: str(v))
    index = {lvl: k for k, lvl in enumerate(levels)}
    Z = np.zeros((len(labels), len(levels)))
    for row, lab in enumerate(labels):
        Z[row, index[lab]] = 1.0
    return Z


def profile_loglik(theta: np.ndarray, y: np.ndarray, X: np.ndarray,
                   ZZts: Sequence[np.ndarray]) -> float:
    """Log-likelihood at variance components theta with beta profiled out.

    theta = (s2_g per grouping..., s2_residual).
    """
    n = len(y)
    V = theta[-1] * np.eye(n)
    for s2, ZZt in zip(theta[:-1], ZZts):
        V += s2 * ZZt
    try:
        L = np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        return -1e300
    logdet = 2.0 * float(np.log(np.diag(L)).sum())
    Vinv_X = np.linalg.solve(V, X)
    Vinv_y = np.linalg.solve(V, y)
    XtVinvX = X.T @ Vinv_X
    beta = np.linalg.solve(XtVinvX, X.T @ Vinv_y)
    r = y - X @ beta
    quad = float(r @ np.linalg.solve(V, r))
    return -0.5 * (n * np.log(2.0 * np.pi) + logdet + quad)


def fit_lme(y: Sequence[float], X: np.ndarray,
            groups: Mapping[str, Sequence]) -> LMEFit:
    """Maximum-likelihood fit of the random-intercept model.

    ``groups`` maps grouping names to per-row labels; an empty mapping
    degenerates to ordinary least squares. Raises on rank-deficient designs
    and on optimizer failure (carrying the best state found).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise LMEError("design matrix does not match the response")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise LMEError("design matrix is rank deficient")
    names = list(groups)
    for name in names:
        if len(set(groups[name])) < 2:
            raise LMEError(f"grouping {name!r} needs at least 2 levels")
    ZZts = []
    for name in names:
        Z = _group_indicator(groups[name])
        ZZts.append(Z @ Z.T)

    n = len(y)
    # work on a unit-variance response for conditioning; map estimates back
    scale = float(np.std(y))
    scale = scale if scale > 0 else 1.0
    ys = y / scale
    ols_beta, *_ = np.linalg.lstsq(X, ys, rcond=None)
    resid = ys - X @ ols_beta
    s2_ols = max(float(resid @ resid) / max(n - X.shape[1], 1), 1e-12)

    floor = 1e-10
    k = len(names)

    def neg_ll(theta: np.ndarray) -> float:
        full = np.maximum(np.asarray(theta, dtype=float), 0.0)
        full[-1] = max(full[-1], floor)
        return -profile_loglik(full, ys, X, ZZts)

    starts = [
        np.array([s2_ols / (2 * k)] * k + [s2_ols / 2]) if k else np.array([s2_ols]),
        np.array([0.0] * k + [s2_ols]),
        np.array([s2_ols] * k + [s2_ols]),
    ]
    bounds = [(0.0, None)] * k + [(floor, None)]
    best = None
    for start in starts:
        res = optimize.minimize(neg_ll, start, method="L-BFGS-B", bounds=bounds)
        if best is None or (np.isfinite(res.fun) and res.fun < best.fun):
            best = res
    if not best.success:
        # simplex fallback for likelihoods that are steep near the boundary
        for start in ([best.x] + starts):
            res = optimize.minimize(neg_ll, start, method="Nelder-Mead",
                                    options={"maxiter": 4000, "xatol": 1e-12,
                                             "fatol": 1e-12})
            if np.isfinite(res.fun) and res.fun < best.fun:
                best = res
    theta = np.maximum(best.x, 0.0)
    theta[-1] = max(theta[-1], floor)
    theta = theta * scale ** 2

    V = theta[-1] * np.eye(n)
    for s2, ZZt in zip(theta[:-1], ZZts):
        V += s2 * ZZt
    Vinv_X = np.linalg.solve(V, X)
    XtVinvX = X.T @ Vinv_X
    beta = np.linalg.solve(XtVinvX, X.T @ np.linalg.solve(V, y))
    cov_beta = np.linalg.inv(XtVinvX)
    se = np.sqrt(np.diag(cov_beta))
    z = float(beta[-1] / se[-1]) if se[-1] > 0 else np.inf
    p = float(2.0 * stats.norm.sf(abs(z)))
    fit = LMEFit(
        beta=beta,
        se_beta=se,
        variance_components={name: float(s2) for name, s2 in zip(names, theta[:-1])},
        residual_variance=float(theta[-1]),
        loglik=profile_loglik(theta, y, X, ZZts),
        p_value=p,
        z_value=z,
        n_obs=n,
        converged=bool(best.success),
    )
    if not best.success:
        raise LMEConvergenceError(
            f"variance-component optimizer did not converge: {best.message}", best=fit)
    return fit


def significance_stars(p: float) -> str:
    if p <= 0.01:
        return "***"
    if p <= 0.05:
        return "**"
    if p <= 0.1:
        return "*"
    return ""
