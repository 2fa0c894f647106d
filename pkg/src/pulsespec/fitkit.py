"""Peak and decay model functions with a Levenberg-Marquardt fit engine.

Model kinds
-----------
lorentzian_sum(n) : [baseline, a_1, c_1, w_1, ..., a_n, c_n, w_n]
    Sum of n Lorentzians a * (w/2)^2 / ((x - c)^2 + (w/2)^2); amplitudes
    may be negative (dip-shaped components).
pseudo_voigt : [baseline, a, c, w, eta]
    baseline + a * (eta * L + (1 - eta) * G) with Lorentzian L and
    Gaussian G sharing center c and FWHM w; eta in [0, 1].
gaussian : [baseline, a, c, w]
    Peak-normalized Gaussian with FWHM w.
exponential : [baseline, a, tau]
    baseline + a * exp(-x / tau).
bi_exponential : [baseline, a1, tau1, a2, tau2]
trace_model : [scale, t_dark]
    scale * template(x) * exp(-x / t_dark), where the template is a
    precomputed excited-population trace interpolated at x.

Widths and decay times are optimized on a log scale and eta through a
logistic transform, which keeps the engine unconstrained while the
reported parameters always satisfy the model invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_LOG2_4 = 4.0 * math.log(2.0)
_MAX_LAMBDA = 1e12


class FitError(ValueError):
    """Bad model layout or unusable fit inputs."""


@dataclass(frozen=True)
class ModelSpec:
    """Identifies a model kind and its fixed structure.

    ``n_peaks`` applies to lorentzian_sum (1 to 9); ``template`` is the
    (times, values) pair required by trace_model.
    """

    kind: str
    n_peaks: int = 1
    template: tuple | None = None

    def __post_init__(self):
        kinds = (
            "lorentzian_sum",
            "pseudo_voigt",
            "gaussian",
            "exponential",
            "bi_exponential",
            "trace_model",
        )
        if self.kind not in kinds:
            raise FitError(f"unknown model kind {self.kind!r}")
        if self.kind == "lorentzian_sum" and not 1 <= self.n_peaks <= 9:
            raise FitError("lorentzian_sum supports 1 to 9 components")
        if self.kind == "trace_model":
            if self.template is None:
                raise FitError("trace_model needs a (times, values) template")
            t, v = self.template
            if len(t) != len(v) or len(t) < 2:
                raise FitError("trace_model template must be two equal-length arrays")

    @property
    def n_params(self) -> int:
        return {
            "lorentzian_sum": 1 + 3 * self.n_peaks,
            "pseudo_voigt": 5,
            "gaussian": 4,
            "exponential": 3,
            "bi_exponential": 5,
            "trace_model": 2,
        }[self.kind]

    @property
    def param_names(self) -> tuple:
        if self.kind == "lorentzian_sum":
            names = ["baseline"]
            for i in range(self.n_peaks):
                names += [f"amp_{i}", f"center_{i}", f"fwhm_{i}"]
            return tuple(names)
        return {
            "pseudo_voigt": ("baseline", "amp", "center", "fwhm", "eta"),
            "gaussian": ("baseline", "amp", "center", "fwhm"),
            "exponential": ("baseline", "amp", "tau"),
            "bi_exponential": ("baseline", "amp_1", "tau_1", "amp_2", "tau_2"),
            "trace_model": ("scale", "t_dark"),
        }[self.kind]

    def transforms(self) -> tuple:
        """Per-parameter internal coordinate: 'id', 'log', or 'logit'."""
        if self.kind == "lorentzian_sum":
            return ("id",) + ("id", "id", "log") * self.n_peaks
        return {
            "pseudo_voigt": ("id", "id", "id", "log", "logit"),
            "gaussian": ("id", "id", "id", "log"),
            "exponential": ("id", "id", "log"),
            "bi_exponential": ("id", "id", "log", "id", "log"),
            "trace_model": ("id", "log"),
        }[self.kind]


def _lorentz(x, c, w):
    hw2 = (0.5 * w) ** 2
    return hw2 / ((x - c) ** 2 + hw2)


def _gauss(x, c, w):
    return np.exp(-_LOG2_4 * ((x - c) / w) ** 2)


def eval_model(spec: ModelSpec, params, x) -> np.ndarray:
    """Model values at ``x`` for the parameter layout of ``spec``."""
    p = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(p) != spec.n_params:
        raise FitError(
            f"{spec.kind} expects {spec.n_params} parameters, got {len(p)}"
        )
    if spec.kind == "lorentzian_sum":
        out = np.full_like(x, p[0])
        for i in range(spec.n_peaks):
            a, c, w = p[1 + 3 * i : 4 + 3 * i]
            out += a * _lorentz(x, c, w)
        return out
    if spec.kind == "pseudo_voigt":
        base, a, c, w, eta = p
        return base + a * (eta * _lorentz(x, c, w) + (1.0 - eta) * _gauss(x, c, w))
    if spec.kind == "gaussian":
        base, a, c, w = p
        return base + a * _gauss(x, c, w)
    if spec.kind == "exponential":
        base, a, tau = p
        return base + a * np.exp(-x / tau)
    if spec.kind == "bi_exponential":
        base, a1, t1, a2, t2 = p
        return base + a1 * np.exp(-x / t1) + a2 * np.exp(-x / t2)
    # trace_model
    scale, t_dark = p
    tt, vv = spec.template
    return scale * np.interp(x, tt, vv) * np.exp(-np.maximum(x, 0.0) / t_dark)


@dataclass(frozen=True)
class FitResult:
    """Outcome of one least-squares minimization.

    ``covariance`` is the Gauss-Newton estimate scaled by the reduced
    chi-square; ``residual_history`` lists the weighted residual norm at
    the start and after every accepted step.
    """

    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    residual_history: tuple

    def stderr(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0))


def _to_internal(p, kinds):
    u = np.array(p, dtype=float)
    for i, k in enumerate(kinds):
        if k == "log":
            if u[i] <= 0:
                raise FitError(f"parameter {i} must be > 0 for a log-scale fit")
            u[i] = math.log(u[i])
        elif k == "logit":
            v = min(max(u[i], 1e-9), 1.0 - 1e-9)
            u[i] = math.log(v / (1.0 - v))
    return u


def _to_external(u, kinds):
    p = np.array(u, dtype=float)
    for i, k in enumerate(kinds):
        if k == "log":
            p[i] = math.exp(min(p[i], 300.0))
        elif k == "logit":
            p[i] = 1.0 / (1.0 + math.exp(-p[i]))
    return p


def _dext_dint(u, kinds):
    g = np.ones_like(u)
    for i, k in enumerate(kinds):
        if k == "log":
            g[i] = math.exp(min(u[i], 300.0))
        elif k == "logit":
            s = 1.0 / (1.0 + math.exp(-u[i]))
            g[i] = s * (1.0 - s)
    return g


def _fd_jacobian(fun, u, n_resid):
    """Central finite-difference Jacobian with relative step 1e-6."""
    jac = np.empty((n_resid, len(u)))
    for i in range(len(u)):
        h = 1e-6 * max(abs(u[i]), 1.0)
        up = u.copy()
        um = u.copy()
        up[i] += h
        um[i] -= h
        jac[:, i] = (fun(up) - fun(um)) / (2.0 * h)
    return jac


def fit(
    spec: ModelSpec,
    x,
    y,
    weights=None,
    init=None,
    max_iter: int = 500,
) -> FitResult:
    """Levenberg-Marquardt minimization of the weighted squared residuals.

    Parameters
    ----------
    spec : ModelSpec
        Model kind and structure.
    x, y : array_like
        Data; len(x) must be at least the number of parameters.
    weights : array_like, optional
        Per-point weights of the squared residuals (uniform if omitted).
    init : array_like, optional
        Starting parameters in the external layout; estimated from the
        data via :func:`initial_guess` if omitted.
    max_iter : int
        Iteration cap; hitting it leaves ``converged`` False.

    Returns
    -------
    FitResult
        Never raises on non-convergence; check ``converged``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise FitError("x and y must have equal length")
    if len(x) < spec.n_params:
        raise FitError("need at least as many points as parameters")
    if init is None:
        init = initial_guess(spec, x, y)
    init = np.asarray(init, dtype=float)
    if len(init) != spec.n_params or not np.all(np.isfinite(init)):
        raise FitError("init must be a finite vector matching the layout")
    if weights is None:
        sqrt_w = np.ones_like(y)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != y.shape or np.any(weights < 0):
            raise FitError("weights must be non-negative and match y")
        sqrt_w = np.sqrt(weights)

    kinds = spec.transforms()

    def residuals(u):
        return (eval_model(spec, _to_external(u, kinds), x) - y) * sqrt_w

    u = _to_internal(init, kinds)
    r = residuals(u)
    cost = float(r @ r)
    lam = 1e-3
    history = [math.sqrt(cost)]
    converged = False
    iterations = 0

    for _ in range(max_iter):
        iterations += 1
        jac = _fd_jacobian(residuals, u, len(r))
        grad = jac.T @ r
        hess = jac.T @ jac
        diag = np.diag(hess).copy()
        diag[diag <= 0] = max(diag.max(), 1.0) * 1e-12

        accepted = False
        while lam <= _MAX_LAMBDA:
            try:
                step = np.linalg.solve(hess + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            u_try = u + step
            r_try = residuals(u_try)
            cost_try = float(r_try @ r_try)
            if np.isfinite(cost_try) and cost_try <= cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            break

        rel_drop = abs(math.sqrt(cost) - math.sqrt(cost_try)) / max(
            math.sqrt(cost), 1e-300
        )
        step_norm = float(np.linalg.norm(step))
        u, r, cost = u_try, r_try, cost_try
        history.append(math.sqrt(cost))
        lam = max(lam / 10.0, 1e-14)
        if rel_drop < 1e-10 or step_norm < 1e-12:
            converged = True
            break

    jac = _fd_jacobian(residuals, u, len(r))
    dof = max(len(x) - spec.n_params, 1)
    scale = cost / dof
    gauss_newton = jac.T @ jac
    try:
        cov_int = np.linalg.inv(gauss_newton) * scale
    except np.linalg.LinAlgError:
        cov_int = np.linalg.pinv(gauss_newton) * scale
    grad_ext = _dext_dint(u, kinds)
    cov = grad_ext[:, None] * cov_int * grad_ext[None, :]
    cov = 0.5 * (cov + cov.T)

    return FitResult(
        params=_to_external(u, kinds),
        covariance=cov,
        residual_norm=math.sqrt(cost),
        iterations=iterations,
        converged=converged,
        residual_history=tuple(history),
    )


def seed_lorentzians(x, y, n_peaks: int, tau: float, width: float | None = None):
    """Physics-based init for a satellite fit: centers at 0, +-1/(2 tau), ...

    ``x`` must be in Hz and ``tau`` in seconds.  Amplitudes are read off
    the data at each seeded center relative to an edge baseline.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    spacing = 1.0 / (2.0 * tau)
    if width is None:
        width = 0.25 * spacing
    orders = [0]
    k = 1
    while len(orders) < n_peaks:
        orders.append(k)
        if len(orders) < n_peaks:
            orders.append(-k)
        k += 1
    edge = max(3, len(x) // 20)
    baseline = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    params = [baseline]
    for n in orders:
        c = n * spacing
        a = float(np.interp(c, x, y)) - baseline
        params += [a, c, width]
    return np.array(params)


def initial_guess(spec: ModelSpec, x, y, tau: float | None = None):
    """Data-driven starting parameters for each model kind."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.kind == "lorentzian_sum":
        if spec.n_peaks > 1:
            if tau is None:
                raise FitError("multi-Lorentzian seeding needs tau")
            return seed_lorentzians(x, y, spec.n_peaks, tau)
        edge = max(3, len(x) // 20)
        baseline = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
        dev = y - baseline
        i = int(np.argmax(np.abs(dev)))
        above = np.abs(dev) >= 0.5 * abs(dev[i])
        width = max((x[1] - x[0]) * above.sum(), (x[1] - x[0]) * 2)
        return np.array([baseline, dev[i], x[i], width])
    if spec.kind in ("gaussian", "pseudo_voigt"):
        edge = max(3, len(x) // 20)
        baseline = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
        dev = y - baseline
        i = int(np.argmax(np.abs(dev)))
        above = np.abs(dev) >= 0.5 * abs(dev[i])
        width = max((x[1] - x[0]) * above.sum(), (x[1] - x[0]) * 2)
        if spec.kind == "gaussian":
            return np.array([baseline, dev[i], x[i], width])
        return np.array([baseline, dev[i], x[i], width, 0.5])
    if spec.kind == "exponential":
        baseline = float(y[-1])
        return np.array([baseline, y[0] - baseline, (x[-1] - x[0]) / 3.0])
    if spec.kind == "bi_exponential":
        baseline = float(min(y[-1], y.min()))
        amp = y[0] - baseline
        span = x[-1] - x[0]
        return np.array([baseline, 0.7 * amp, span / 20.0, 0.3 * amp, span / 2.0])
    # trace_model
    tt, vv = spec.template
    ref = np.interp(x, tt, vv)
    good = np.abs(ref) > 0.05 * np.max(np.abs(ref))
    scale = float(np.median(y[good] / ref[good])) if good.any() else 1.0
    return np.array([scale, x[-1] - x[0]])


@dataclass(frozen=True)
class SatelliteLine:
    """One non-central fitted component matched to its predicted position."""

    order: int
    fitted_hz: float
    predicted_hz: float
    residual_hz: float


def extract_satellites(result: FitResult, spec: ModelSpec, tau: float):
    """Match fitted Lorentzian centers to the n / (2 tau) satellite ladder.

    Components whose nearest ladder position is the carrier itself
    (order 0) are skipped; every other center is paired with the closest
    integer multiple of 1 / (2 tau).

    Returns
    -------
    list of SatelliteLine, sorted by order.
    """
    if spec.kind != "lorentzian_sum":
        raise FitError("satellite extraction needs a lorentzian_sum fit")
    if not result.converged:
        raise FitError("satellite extraction needs a converged fit")
    centers = result.params[2::3]
    spacing = 1.0 / (2.0 * tau)
    lines = []
    for c in centers:
        order = int(round(c / spacing))
        if order == 0:
            continue
        predicted = order * spacing
        lines.append(SatelliteLine(order, float(c), predicted, float(c - predicted)))
    return sorted(lines, key=lambda s: s.order)


def linewidth_report(result: FitResult, spec: ModelSpec, unit: float = 1e6):
    """FWHM of every peak component with its one-sigma uncertainty.

    Values are divided by ``unit`` (1e6 turns Hz-axis fits into MHz).
    For the pseudo-Voigt the shared FWHM is the profile FWHM: both
    constituents cross half maximum at the same points.

    Returns
    -------
    list of (label, fwhm, stderr) tuples.
    """
    err = result.stderr()
    rows = []
    if spec.kind == "lorentzian_sum":
        for i in range(spec.n_peaks):
            j = 3 + 3 * i
            rows.append((f"lorentzian_{i}", result.params[j] / unit, err[j] / unit))
    elif spec.kind in ("gaussian", "pseudo_voigt"):
        rows.append((spec.kind, result.params[3] / unit, err[3] / unit))
    else:
        raise FitError(f"{spec.kind} has no linewidth")
    return rows
