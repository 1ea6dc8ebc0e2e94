"""Zero-noise extrapolation fits.

Every fit maps points ``(λᵢ, yᵢ, σᵢ²)`` to a value at ``λ = 0``:

``linear`` / ``polynomial`` (order K)
    Least squares in ascending-power coefficients; ``params[0]`` is the limit.
``richardson``
    Exact interpolation through all points; ``params`` are the weights
    ``Fᵢ`` with limit ``Σ Fᵢ·yᵢ``.
``exponential``
    Pure decay ``y = A·e^{−fλ}`` fitted linearly in log space (sign guarded);
    with ``offset=True`` the form ``a·e^{−fλ} + b`` is fitted by nonlinear least
    squares.
``poly_exponential`` (order K)
    ``y = ±exp(Σₖ cₖ λᵏ)`` fitted in log space; with ``offset=True`` the form
    ``a·exp(Σ_{k≥1} cₖ λᵏ) + b``.

Least-squares fits are weighted by ``1/σᵢ²`` when every supplied variance is
positive.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ..errors import FitFailureError, InvalidInputError

FIT_MODELS = ("linear", "polynomial", "richardson", "exponential", "poly_exponential")

MAX_ITERATIONS = 200
PARAM_TOL = 1e-10


@dataclass(frozen=True)
class FitSpec:
    """A fit kind plus its order (for polynomial forms) and offset flag."""

    model: str = "exponential"
    order: int = None
    offset: bool = False

    def __post_init__(self):
        if self.model not in FIT_MODELS:
            raise InvalidInputError(f"unknown fit model {self.model!r}")
        if self.model in ("polynomial", "poly_exponential"):
            if self.order is None or int(self.order) < 1:
                raise InvalidInputError(f"{self.model} needs an order K >= 1")
            object.__setattr__(self, "order", int(self.order))
        elif self.order is not None:
            raise InvalidInputError(f"{self.model} takes no order")
        if self.offset and self.model not in ("exponential", "poly_exponential"):
            raise InvalidInputError("offset applies only to exponential fits")

    @classmethod
    def parse(cls, text, offset=False):
        """Parse ``"linear"``, ``"polynomial(2)"``, ``"poly_exponential(2)"`` and so on."""
        if isinstance(text, FitSpec):
            return text
        m = re.fullmatch(r"\s*([a-z_]+)\s*(?:\(\s*(\d+)\s*\))?\s*", str(text))
        if not m:
            raise InvalidInputError(f"cannot parse fit model {text!r}")
        order = int(m.group(2)) if m.group(2) else None
        return cls(m.group(1), order, offset)

    def n_params(self, n_points=None):
        if self.model == "linear":
            return 2
        if self.model == "polynomial":
            return self.order + 1
        if self.model == "richardson":
            return n_points if n_points is not None else 2
        if self.model == "exponential":
            return 3 if self.offset else 2
        return self.order + 1 + (1 if self.offset else 0)

    def __str__(self):
        base = self.model if self.order is None else f"{self.model}({self.order})"
        return base + ("+offset" if self.offset else "")


@dataclass(frozen=True)
class FitResult:
    """Outcome of an extrapolation.

    Attributes:
        model: fit actually used (may differ from the request after a fallback).
        params: fitted parameters; see the module docstring for each model.
        extrapolated: value at zero noise.
        residual: residual sum of squares (weighted when weights were used).
        param_variances: diagonal of the parameter covariance.
        info: extra details such as ``extrapolated_variance``, ``weighted``,
            ``requested`` and ``fallback``.
    """

    model: str
    params: tuple
    extrapolated: float
    residual: float
    param_variances: tuple
    info: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "model": self.model,
            "params": [float(p) for p in self.params],
            "extrapolated": float(self.extrapolated),
            "residual": float(self.residual),
            "param_variances": [float(v) for v in self.param_variances],
        }


def _normalize_points(points):
    lam, y, var = [], [], []
    for p in points:
        if len(p) == 2:
            l_, v_ = p
            s2 = None
        else:
            l_, v_, s2 = p
        lam.append(float(l_))
        y.append(float(v_))
        var.append(None if s2 is None else float(s2))
    if len(set(lam)) != len(lam):
        raise InvalidInputError("duplicate noise scales")
    if not all(math.isfinite(v) for v in y + lam):
        raise InvalidInputError("non-finite data point")
    lam = np.array(lam)
    y = np.array(y)
    if any(v is None for v in var):
        var = None
    else:
        var = np.array(var)
        if np.any(var < 0):
            raise InvalidInputError("negative variance")
    return lam, y, var


def _weighted_lstsq(a, y, var):
    """Solve the (optionally weighted) linear least-squares problem.

    Returns ``(coef, rss, cov, gain)`` where ``gain`` maps ``y`` to ``coef``.
    """
    weighted = var is not None and np.all(var > 0)
    w = 1.0 / var if weighted else np.ones(len(y))
    sw = np.sqrt(w)
    aw = a * sw[:, None]
    ata = aw.T @ aw
    if np.linalg.cond(ata) > 1e14:
        raise InvalidInputError("design matrix is singular for these noise scales")
    ata_inv = np.linalg.inv(ata)
    gain = ata_inv @ (a.T * w)
    coef = gain @ y
    res = y - a @ coef
    rss = float(np.sum(w * res * res))
    if weighted:
        cov = ata_inv
    else:
        dof = len(y) - a.shape[1]
        s2 = rss / dof if dof > 0 else 0.0
        cov = s2 * ata_inv
    return coef, rss, cov, gain, weighted


def _y_variance_of_linear(gain_row, var):
    if var is None:
        return 0.0
    return float(np.sum(gain_row**2 * var))


def _fit_polynomial(lam, y, var, order, model):
    if len(y) < order + 1:
        raise InvalidInputError(f"{model} needs at least {order + 1} points")
    a = np.vander(lam, order + 1, increasing=True)
    coef, rss, cov, gain, weighted = _weighted_lstsq(a, y, var)
    info = {"weighted": weighted, "extrapolated_variance": _y_variance_of_linear(gain[0], var)}
    return FitResult(model, tuple(coef), float(coef[0]), rss, tuple(np.diag(cov)), info)


def _fit_richardson(lam, y, var):
    k = len(lam)
    if k < 2:
        raise InvalidInputError("richardson needs at least 2 points")
    # weights F solve Σ Fᵢ λᵢ^m = δ_{m0} for m < k
    v = np.vander(lam, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[0] = 1.0
    weights = np.linalg.solve(v, rhs)
    extrap = float(weights @ y)
    contrib = tuple(weights**2 * var) if var is not None else tuple(np.zeros(k))
    info = {"weighted": False, "extrapolated_variance": float(sum(contrib))}
    return FitResult("richardson", tuple(weights), extrap, 0.0, contrib, info)


def _log_fit(lam, y, var, order, model):
    signs = np.sign(y)
    if np.any(signs == 0) or np.any(signs != signs[0]):
        return None
    s = float(signs[0])
    ly = np.log(np.abs(y))
    lvar = var / (y * y) if var is not None else None
    a = np.vander(lam, order + 1, increasing=True)
    coef, rss, cov, gain, weighted = _weighted_lstsq(a, ly, lvar)
    extrap = s * math.exp(coef[0])
    info = {
        "weighted": weighted,
        "sign": s,
        "log_params": tuple(float(c) for c in coef),
        "extrapolated_variance": extrap**2 * _y_variance_of_linear(gain[0], lvar),
    }
    if model == "exponential":
        params = (extrap, float(-coef[1]))
        pvars = (extrap**2 * float(cov[0, 0]), float(cov[1, 1]))
    else:
        params = tuple(float(c) for c in coef)
        pvars = tuple(np.diag(cov))
    return FitResult(model, params, extrap, rss, pvars, info)


def _nonlinear(fun, jac, x0, lam, y, var, model, n_params):
    if len(y) < n_params:
        raise InvalidInputError(f"{model} needs at least {n_params} points")
    weighted = var is not None and np.all(var > 0)
    sw = 1.0 / np.sqrt(var) if weighted else np.ones(len(y))

    def resid(x):
        return (fun(x, lam) - y) * sw

    def rjac(x):
        return jac(x, lam) * sw[:, None]

    try:
        sol = least_squares(
            resid, x0, jac=rjac, method="lm", xtol=PARAM_TOL, ftol=PARAM_TOL,
            gtol=PARAM_TOL, max_nfev=MAX_ITERATIONS * (len(x0) + 1),
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise FitFailureError(f"{model} fit failed: {exc}", {"x0": list(map(float, x0))}) from exc
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitFailureError(
            f"{model} fit did not converge",
            {"status": int(sol.status), "nfev": int(sol.nfev), "params": sol.x.tolist(),
             "residual": float(np.sum(sol.fun**2))},
        )
    j = sol.jac
    try:
        cov = np.linalg.pinv(j.T @ j)
    except np.linalg.LinAlgError:
        cov = np.full((len(x0), len(x0)), np.nan)
    if not weighted:
        dof = len(y) - len(x0)
        cov = cov * (float(np.sum(sol.fun**2)) / dof if dof > 0 else 0.0)
    return sol, cov, weighted


def _fit_exp_offset(lam, y, var):
    # start from the pure fit of the data shifted by a crude asymptote guess
    b0 = 0.0
    a0, f0 = y[0], 0.1
    pure = _log_fit(lam, y, var, 1, "exponential")
    if pure is not None:
        a0, f0 = pure.params

    def fun(x, l_):
        return x[0] * np.exp(-x[1] * l_) + x[2]

    def jac(x, l_):
        e = np.exp(-x[1] * l_)
        return np.column_stack([e, -x[0] * l_ * e, np.ones_like(l_)])

    sol, cov, weighted = _nonlinear(fun, jac, np.array([a0, f0, b0]), lam, y, var, "exponential", 3)
    a, f, b = sol.x
    g = np.array([1.0, 0.0, 1.0])
    info = {"weighted": weighted, "offset": True, "nfev": int(sol.nfev),
            "extrapolated_variance": float(g @ cov @ g)}
    return FitResult("exponential", (float(a), float(f), float(b)), float(a + b),
                     float(np.sum(sol.fun**2)), tuple(np.diag(cov)), info)


def _fit_polyexp_offset(lam, y, var, order):
    pure = _log_fit(lam, y, var, order, "poly_exponential")
    if pure is not None:
        x0 = np.array([pure.extrapolated] + list(pure.params[1:]) + [0.0])
    else:
        x0 = np.array([y[0]] + [-0.1] + [0.0] * (order - 1) + [0.0])

    def fun(x, l_):
        poly = sum(x[k] * l_**k for k in range(1, order + 1))
        return x[0] * np.exp(poly) + x[-1]

    def jac(x, l_):
        poly = sum(x[k] * l_**k for k in range(1, order + 1))
        e = np.exp(poly)
        cols = [e] + [x[0] * l_**k * e for k in range(1, order + 1)] + [np.ones_like(l_)]
        return np.column_stack(cols)

    sol, cov, weighted = _nonlinear(fun, jac, x0, lam, y, var, "poly_exponential", order + 2)
    g = np.zeros(order + 2)
    g[0] = g[-1] = 1.0
    info = {"weighted": weighted, "offset": True, "nfev": int(sol.nfev),
            "extrapolated_variance": float(g @ cov @ g)}
    return FitResult("poly_exponential", tuple(float(v) for v in sol.x),
                     float(sol.x[0] + sol.x[-1]), float(np.sum(sol.fun**2)), tuple(np.diag(cov)), info)


def extrapolate(points, model="exponential", order=None, offset=False):
    """Fit ``points`` and evaluate the fitted curve at zero noise.

    Args:
        points: sequence of ``(λ, value)`` or ``(λ, value, variance)``.
        model: a :class:`FitSpec`, a model name, or a string like ``"polynomial(2)"``.
        order: polynomial order for ``polynomial`` / ``poly_exponential``.
        offset: fit an additive offset in the exponential forms.

    Returns:
        :class:`FitResult`.

    Raises:
        InvalidInputError: duplicate scales or too few points.
        FitFailureError: a nonlinear fit failed to converge.
    """
    if isinstance(model, FitSpec):
        spec = model
    elif order is None and "(" in str(model):
        spec = FitSpec.parse(model, offset)
    else:
        spec = FitSpec(model, order, offset)
    lam, y, var = _normalize_points(points)
    n_needed = spec.n_params(len(lam))
    if len(lam) < n_needed:
        raise InvalidInputError(f"{spec} needs at least {n_needed} points, got {len(lam)}")
    if spec.model == "linear":
        return _fit_polynomial(lam, y, var, 1, "linear")
    if spec.model == "polynomial":
        return _fit_polynomial(lam, y, var, spec.order, "polynomial")
    if spec.model == "richardson":
        return _fit_richardson(lam, y, var)
    if spec.offset:
        if spec.model == "exponential":
            return _fit_exp_offset(lam, y, var)
        return _fit_polyexp_offset(lam, y, var, spec.order)
    order_ = 1 if spec.model == "exponential" else spec.order
    res = _log_fit(lam, y, var, order_, spec.model)
    if res is not None:
        return res
    lin = _fit_polynomial(lam, y, var, 1, "linear")
    info = dict(lin.info, requested=str(spec), fallback="linear",
                reason="values do not share one sign")
    return FitResult("linear", lin.params, lin.extrapolated, lin.residual, lin.param_variances, info)
