"""Binned fits of lineshape and decay-count data, and the width-lifetime ratio.

Both fitters minimise a weighted sum of squares of bin-integrated models
with a hand-written Levenberg-Marquardt iteration.  The default
``weighting="poisson"`` re-solves with model-based weights ``1/mu``
until the weights stop changing (iteratively reweighted least squares,
whose fixed point is the Poisson maximum-likelihood estimate);
``weighting="neyman"`` keeps the data-based weights ``1/max(count, 1)``
throughout.  Neyman weights bias the fitted widths low by a sizeable
fraction of a standard error at 1e5 events, which is why they are not
the default.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryStuck, DegenerateData, FitNonConvergence, UnconvergedInput

MAX_ITER = 200
STEP_TOL = 1e-9
CHI2_TOL = 1e-12
WEIGHTINGS = ("poisson", "neyman")

# 16-point Gauss-Legendre nodes on [-1, 1] for bin integrals with a background
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class LMResult:
    params: np.ndarray
    chi2: float
    iterations: int
    step_norm: float
    converged: bool
    jac: np.ndarray = field(repr=False, default=None)


def levenberg_marquardt(fun, p0, max_iter=MAX_ITER, step_tol=STEP_TOL, chi2_tol=CHI2_TOL):
    """Minimise ``|r(p)|**2`` where ``fun(p) -> (r, J)``.

    Damping is additive (``J^T J + lam I``), starts at ``1e-3`` times the
    largest diagonal element, grows by 10 on a rejected step and shrinks
    by 3 on an accepted one.  Convergence needs a relative step below
    ``step_tol`` together with a relative chi-square change below
    ``chi2_tol``; a chi-square already at rounding level (exact data)
    counts as unchanged.
    """
    p = np.array(p0, dtype=float)
    r, J = fun(p)
    chi2 = float(r @ r)
    floor = 1e-28 * max(r.size, 1)
    A = J.T @ J
    lam = 1e-3 * float(np.max(np.diag(A))) if A.size else 0.0
    lam = lam if lam > 0 else 1e-3
    step_norm = math.inf
    for it in range(1, max_iter + 1):
        g = J.T @ r
        A = J.T @ J
        try:
            delta = np.linalg.solve(A + lam * np.eye(p.size), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        trial = p + delta
        r_new, J_new = fun(trial)
        chi2_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
        step_norm = float(np.linalg.norm(delta))
        rel_step = step_norm / (np.linalg.norm(p) + 1e-30)
        if chi2_new <= chi2:
            dchi2 = chi2 - chi2_new
            p, r, J, chi2 = trial, r_new, J_new, chi2_new
            lam /= 3.0
            if rel_step < step_tol and (dchi2 <= chi2_tol * chi2 or chi2 <= floor):
                return LMResult(p, chi2, it, step_norm, True, J)
        else:
            lam *= 10.0
            if rel_step < step_tol and chi2_new - chi2 <= chi2_tol * chi2 + floor:
                # rejected only through rounding: already at the minimum
                return LMResult(p, chi2, it, step_norm, True, J)
    return LMResult(p, chi2, max_iter, step_norm, False, J)


def _exp(x):
    """``exp`` that saturates to ``inf`` so wild trial steps are rejected, not fatal."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _solve_weighted(model, counts, p0, weighting, max_outer=50):
    """Weighted least squares with fixed or iteratively updated weights.

    ``model(p) -> (mu, dmu)`` with ``dmu`` of shape ``(m, n)``.  Returns the
    final :class:`LMResult`, the weights used, and the total iteration count.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"weighting must be one of {WEIGHTINGS}")
    c = np.asarray(counts, dtype=float)
    w = 1.0 / np.maximum(c, 1.0)
    total = 0

    def make(wt):
        sw = np.sqrt(wt)

        def fun(p):
            mu, dmu = model(p)
            return (mu - c) * sw, dmu * sw[:, None]
        return fun

    res = levenberg_marquardt(make(w), p0)
    total += res.iterations
    if not res.converged:
        return res, w, total
    if weighting == "neyman":
        return res, w, total
    for _ in range(max_outer):
        mu, _ = model(res.params)
        w = 1.0 / np.maximum(mu, 1e-10)
        prev = res.params
        res = levenberg_marquardt(make(w), prev)
        total += res.iterations
        if not res.converged:
            return res, w, total
        if np.all(np.abs(res.params - prev) <= 1e-10 * (1.0 + np.abs(prev))):
            break
    mu, _ = model(res.params)
    w = 1.0 / np.maximum(mu, 1e-10)
    return res, w, total


def _sym(c):
    return 0.5 * (c + c.T)


def _covariance(model, p, w):
    """Inverse of the undamped normal matrix ``J^T W J`` at the optimum."""
    _, dmu = model(p)
    A = dmu.T @ (w[:, None] * dmu)
    cov = np.linalg.pinv(A, hermitian=True)
    return 0.5 * (cov + cov.T)


def _pearson(mu, c, w):
    return float(np.sum(w * (c - mu) ** 2))


# lineshape ------------------------------------------------------------------


def lorentzian_bin_integrals(lo, hi, e_r, gamma):
    """``int_lo^hi dE / ((E - E_R)**2 + Gamma**2/4)`` in closed form."""
    a = np.arctan(2.0 * (np.asarray(hi) - e_r) / gamma)
    b = np.arctan(2.0 * (np.asarray(lo) - e_r) / gamma)
    return (2.0 / gamma) * (a - b)


def _lineshape_model(lo, hi, n_bg, log_gamma=True):
    """Bin-integrated ``A |1/(E - z) + sum_k b_k E**k|**2`` and its derivatives.

    Parameters: ``E_R``, ``log Gamma`` (or ``Gamma``), ``log A``, then the
    real and imaginary part of each background coefficient.
    """
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo)[:, None] + half[:, None] * _GL_X[None, :]
    weights = half[:, None] * _GL_W[None, :]

    def model(p):
        e_r = p[0]
        gamma = _exp(p[1]) if log_gamma else p[1]
        amp = _exp(p[2])
        if not (0 < gamma < math.inf and amp < math.inf):
            return np.full(lo.size, np.inf), np.zeros((lo.size, p.size))
        if n_bg == 0:
            u_hi = 2.0 * (hi - e_r) / gamma
            u_lo = 2.0 * (lo - e_r) / gamma
            F = (2.0 / gamma) * (np.arctan(u_hi) - np.arctan(u_lo))
            k_hi = 1.0 / (1.0 + u_hi ** 2)
            k_lo = 1.0 / (1.0 + u_lo ** 2)
            dF_de = -(4.0 / gamma ** 2) * (k_hi - k_lo)
            dF_dg = -F / gamma - (2.0 / gamma ** 2) * (u_hi * k_hi - u_lo * k_lo)
            mu = amp * F
            jac = np.empty((lo.size, 3))
            jac[:, 0] = amp * dF_de
            jac[:, 1] = amp * dF_dg * (gamma if log_gamma else 1.0)
            jac[:, 2] = mu
            return mu, jac
        z = complex(e_r, -0.5 * gamma)
        coef = p[3::2] + 1j * p[4::2]
        powers = nodes[..., None] ** np.arange(n_bg)
        d = 1.0 / (nodes - z)
        u = d + powers @ coef
        uc = np.conj(u)
        intensity = (u * uc).real
        mu = amp * np.sum(weights * intensity, axis=1)
        jac = np.empty((lo.size, p.size))
        d2 = d * d
        jac[:, 0] = amp * np.sum(weights * 2.0 * (uc * d2).real, axis=1)
        dg = 2.0 * (uc * (-0.5j) * d2).real * (gamma if log_gamma else 1.0)
        jac[:, 1] = amp * np.sum(weights * dg, axis=1)
        jac[:, 2] = mu
        for k in range(n_bg):
            pk = powers[..., k]
            jac[:, 3 + 2 * k] = amp * np.sum(weights * 2.0 * (uc * pk).real, axis=1)
            jac[:, 4 + 2 * k] = amp * np.sum(weights * 2.0 * (uc * 1j * pk).real, axis=1)
        return mu, jac

    return model


@dataclass(frozen=True)
class LineshapeFit:
    """Fitted ``(E_R, Gamma)``, norm and background, with covariance.

    The Breit-Wigner coupling is fixed to ``r = 1``: its modulus is
    absorbed into ``norm`` and its phase into the background.
    ``covariance`` is over ``names`` in physical units.
    """

    names: tuple
    estimates: dict
    covariance: np.ndarray
    chi2: float
    dof: int
    iterations: int
    step_norm: float
    converged: bool
    weighting: str = "poisson"
    coupling: complex = 1.0

    @property
    def e_r(self):
        return self.estimates["E_R"]

    @property
    def gamma(self):
        return self.estimates["Gamma"]

    @property
    def norm(self):
        return self.estimates["norm"]

    @property
    def standard_errors(self):
        se = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return dict(zip(self.names, (float(x) for x in se)))

    def to_dict(self):
        return _fit_dict(self, {"coupling": [self.coupling.real, self.coupling.imag]})


def _fit_dict(fit, extra):
    out = {
        "estimates": {k: float(v) for k, v in fit.estimates.items()},
        "standard_errors": fit.standard_errors,
        "parameters": list(fit.names),
        "covariance": [[float(x) for x in row] for row in np.asarray(fit.covariance)],
        "chi2": float(fit.chi2),
        "dof": int(fit.dof),
        "iterations": int(fit.iterations),
        "step_norm": float(fit.step_norm),
        "converged": bool(fit.converged),
        "weighting": fit.weighting,
    }
    out.update(extra)
    return out


def _initial_lineshape(lo, hi, c):
    centers = 0.5 * (lo + hi)
    k = int(np.argmax(c))
    peak = c[k]
    half = 0.5 * peak
    i = k
    while i > 0 and c[i] > half:
        i -= 1
    j = k
    while j < c.size - 1 and c[j] > half:
        j += 1
    # linear interpolation of the half-maximum crossings
    def cross(a, b):
        if c[a] == c[b]:
            return centers[a]
        return centers[a] + (half - c[a]) * (centers[b] - centers[a]) / (c[b] - c[a])
    left = cross(i, i + 1) if c[i] <= half else centers[0]
    right = cross(j - 1, j) if c[j] <= half else centers[-1]
    width = float(hi[k] - lo[k])
    gamma = max(right - left, 2.0 * width)
    amp = peak * gamma ** 2 / (4.0 * width)
    return float(centers[k]), float(gamma), float(amp)


def _check_counts(counts):
    c = np.asarray(counts, dtype=float)
    if c.ndim == 2:
        if c.shape[0] != 1:
            c = c.sum(axis=0)
        else:
            c = c[0]
    if np.any(~np.isfinite(c)) or np.any(c < 0):
        raise DegenerateData("counts must be finite and nonnegative")
    return c


def fit_lineshape(data, bg_order=None, init=None, weighting="poisson", parameterization="log"):
    """Fit binned energy counts to the bin-integrated Breit-Wigner lineshape.

    Parameters
    ----------
    data : BinnedCounts
        Energy histogram (a single row of counts).
    bg_order : int or None
        Degree of the complex polynomial background; ``None`` fits the pure
        Breit-Wigner shape.
    init : dict, optional
        Starting values for ``E_R``, ``Gamma`` and ``norm``; by default the
        peak-bin centre, a half-maximum scan and the peak height.
    weighting : {"poisson", "neyman"}
    parameterization : {"log", "linear"}
        Whether ``Gamma`` enters the iteration as ``log Gamma``.
    """
    lo, hi = np.asarray(data.lo, dtype=float), np.asarray(data.hi, dtype=float)
    c = _check_counts(data.counts)
    n_bg = 0 if bg_order is None else int(bg_order) + 1
    n_par = 3 + 2 * n_bg
    nonzero = int(np.count_nonzero(c))
    if nonzero == 0:
        raise DegenerateData("all counts are zero")
    if nonzero < 5:
        raise DegenerateData(f"need at least 5 nonzero bins, got {nonzero}")
    if c.size < n_par + 1:
        raise DegenerateData(f"{c.size} bins cannot constrain {n_par} parameters")
    if parameterization not in ("log", "linear"):
        raise ValueError("parameterization must be 'log' or 'linear'")
    log_gamma = parameterization == "log"

    e0, g0, a0 = _initial_lineshape(lo, hi, c)
    if init:
        e0 = float(init.get("E_R", e0))
        g0 = float(init.get("Gamma", g0))
        a0 = float(init.get("norm", a0))
    p0 = np.zeros(n_par)
    p0[:3] = [e0, math.log(g0) if log_gamma else g0, math.log(a0)]
    if init and "background" in init:
        for k, b in enumerate(init["background"][:n_bg]):
            b = complex(*b) if isinstance(b, (list, tuple)) else complex(b)
            p0[3 + 2 * k], p0[4 + 2 * k] = b.real, b.imag

    model = _lineshape_model(lo, hi, n_bg, log_gamma)
    res, w, iters = _solve_weighted(model, c, p0, weighting)
    p = res.params
    gamma = math.exp(p[1]) if log_gamma else p[1]
    min_width = float(np.min(hi - lo))
    if not gamma > 1e-3 * min_width:
        raise BoundaryStuck(f"width collapsed towards zero (Gamma = {gamma:.3g})")
    if not res.converged:
        raise FitNonConvergence(f"lineshape fit did not converge in {MAX_ITER} iterations")

    cov_int = _covariance(model, p, w)
    # internal -> physical (E_R, Gamma, norm, background...)
    T = np.eye(n_par)
    T[1, 1] = gamma if log_gamma else 1.0
    T[2, 2] = math.exp(p[2])
    cov = _sym(T @ cov_int @ T.T)
    names = ["E_R", "Gamma", "norm"]
    est = {"E_R": float(p[0]), "Gamma": float(gamma), "norm": float(math.exp(p[2]))}
    for k in range(n_bg):
        names += [f"b{k}_re", f"b{k}_im"]
        est[f"b{k}_re"] = float(p[3 + 2 * k])
        est[f"b{k}_im"] = float(p[4 + 2 * k])
    mu, _ = model(p)
    return LineshapeFit(tuple(names), est, cov, _pearson(mu, c, w), int(c.size - n_par),
                        iters, res.step_norm, True, weighting)


# decay counts ---------------------------------------------------------------


def _decay_model(lo, hi, n_ch):
    """Stacked ``a_eta (exp(-lo/tau) - exp(-hi/tau))``; params ``log tau, log a_eta``."""
    m = lo.size

    def model(p):
        tau = _exp(p[0])
        amps = [_exp(x) for x in p[1:]]
        if not (0 < tau < math.inf and max(amps) < math.inf):
            return np.full(n_ch * m, np.inf), np.zeros((n_ch * m, p.size))
        e_lo = np.exp(-lo / tau)
        e_hi = np.exp(-hi / tau)
        shape = e_lo - e_hi
        dshape = (e_lo * lo - e_hi * hi) / tau  # d shape / d log tau
        mu = np.empty(n_ch * m)
        jac = np.zeros((n_ch * m, 1 + n_ch))
        for k in range(n_ch):
            a = amps[k]
            sl = slice(k * m, (k + 1) * m)
            mu[sl] = a * shape
            jac[sl, 0] = a * dshape
            jac[sl, 1 + k] = a * shape
        return mu, jac

    return model


@dataclass(frozen=True)
class DecayFit:
    """Fitted lifetime and initial partial rates ``R_eta(0) = a_eta / (N tau)``."""

    names: tuple
    estimates: dict
    covariance: np.ndarray
    chi2: float
    dof: int
    iterations: int
    step_norm: float
    converged: bool
    weighting: str = "poisson"
    mode: str = "joint"
    labels: tuple = ()
    channel_taus: tuple = ()

    @property
    def tau(self):
        return self.estimates["tau"]

    @property
    def rate(self):
        return 1.0 / self.tau

    @property
    def rates(self):
        return tuple(self.estimates[f"R_{lab}"] for lab in self.labels)

    @property
    def standard_errors(self):
        se = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return dict(zip(self.names, (float(x) for x in se)))

    def to_dict(self):
        extra = {"mode": self.mode, "labels": list(self.labels)}
        if self.channel_taus:
            extra["channel_taus"] = [[float(t), float(s)] for t, s in self.channel_taus]
        return _fit_dict(self, extra)


def _initial_tau(lo, hi, c):
    centers = 0.5 * (lo + hi)
    keep = c > 0
    if np.count_nonzero(keep) >= 2:
        x, y = centers[keep], np.log(c[keep] / (hi - lo)[keep])
        slope, _ = np.polyfit(x, y, 1, w=np.sqrt(c[keep]))
        if slope < 0:
            return -1.0 / slope
    return (hi[-1] - lo[0]) / 3.0


def _fit_channels(lo, hi, rows, N, tau0, weighting, labels):
    n_ch = len(rows)
    c = np.concatenate(rows)
    tau0 = float(tau0)
    shape = math.exp(-lo[0] / tau0) - math.exp(-hi[-1] / tau0)
    p0 = np.concatenate([[math.log(tau0)], [math.log(max(r.sum(), 1.0) / shape) for r in rows]])
    model = _decay_model(lo, hi, n_ch)
    res, w, iters = _solve_weighted(model, c, p0, weighting)
    if not res.converged:
        raise FitNonConvergence(f"decay fit did not converge in {MAX_ITER} iterations")
    p = res.params
    tau = math.exp(p[0])
    amps = np.exp(p[1:])
    cov_int = _covariance(model, p, w)
    # physical parameters: tau, R_eta = a_eta / (N tau)
    T = np.zeros((1 + n_ch, 1 + n_ch))
    T[0, 0] = tau
    for k in range(n_ch):
        r = amps[k] / (N * tau)
        T[1 + k, 0] = -r
        T[1 + k, 1 + k] = r
    cov = _sym(T @ cov_int @ T.T)
    mu, _ = model(p)
    est = {"tau": tau}
    for k, lab in enumerate(labels):
        est[f"R_{lab}"] = float(amps[k] / (N * tau))
    return est, cov, _pearson(mu, c, w), c.size - (1 + n_ch), iters, res.step_norm


def fit_decay(data, mode="joint", init=None, weighting="poisson", events=None):
    """Fit binned decay counts to exact bin integrals of the exponential law.

    ``mode="joint"`` shares one lifetime across channels; ``"per-channel"``
    fits each channel on its own and reports the inverse-variance mean of
    the channel lifetimes; ``"total"`` fits the channel-summed counts.
    ``init`` may hold ``tau``; otherwise the sample mean of ``events`` is
    used when given, else the log-slope of the counts.
    """
    if mode not in ("joint", "per-channel", "total"):
        raise ValueError(f"unknown mode {mode!r}")
    lo, hi = np.asarray(data.lo, dtype=float), np.asarray(data.hi, dtype=float)
    counts = np.atleast_2d(np.asarray(data.counts, dtype=float))
    if np.any(~np.isfinite(counts)) or np.any(counts < 0):
        raise DegenerateData("counts must be finite and nonnegative")
    labels = tuple(data.labels)[: counts.shape[0]]
    if mode == "total":
        counts = counts.sum(axis=0, keepdims=True)
        labels = ("total",)
    N = float(data.total) if data.total else float(counts.sum())
    if not counts.any():
        raise DegenerateData("all counts are zero")
    for lab, row in zip(labels, counts):
        nz = int(np.count_nonzero(row))
        if nz < 3:
            raise DegenerateData(f"channel {lab} has {nz} nonzero bins; need at least 3")

    if init and "tau" in init:
        tau0 = float(init["tau"])
    elif events is not None and len(events) >= 2:
        tau0 = float(np.mean(events.times))
    else:
        tau0 = _initial_tau(lo, hi, counts.sum(axis=0))

    if mode in ("joint", "total"):
        est, cov, chi2, dof, iters, step = _fit_channels(lo, hi, list(counts), N, tau0, weighting, labels)
        names = ("tau",) + tuple(f"R_{lab}" for lab in labels)
        return DecayFit(names, est, cov, chi2, int(dof), iters, step, True, weighting, mode, labels)

    # per-channel: independent fits, lifetimes combined by inverse variance
    taus, blocks, est = [], [], {}
    chi2 = dof = iters = 0
    step = 0.0
    for lab, row in zip(labels, counts):
        e, cv, x2, d, it, st = _fit_channels(lo, hi, [row], N, tau0, weighting, (lab,))
        taus.append((e["tau"], math.sqrt(cv[0, 0])))
        est[f"R_{lab}"] = e[f"R_{lab}"]
        blocks.append(cv)
        chi2 += x2
        dof += d
        iters += it
        step = max(step, st)
    wts = np.array([1.0 / s ** 2 for _, s in taus])
    tau = float(np.sum(wts * [t for t, _ in taus]) / wts.sum())
    n = 1 + len(labels)
    cov = np.zeros((n, n))
    cov[0, 0] = 1.0 / wts.sum()
    for k, cv in enumerate(blocks):
        cov[1 + k, 1 + k] = cv[1, 1]
    names = ("tau",) + tuple(f"R_{lab}" for lab in labels)
    return DecayFit(names, {"tau": tau, **est}, cov, chi2, int(dof), iters, step, True,
                    weighting, mode, labels, tuple(taus))


# ratio ----------------------------------------------------------------------


@dataclass(frozen=True)
class RatioReport:
    """``tau Gamma / hbar`` with its first-order propagated error and pull.

    The two inputs come from disjoint datasets, so their errors are
    combined as independent.
    """

    product: float
    se: float
    pull: float
    tau: float
    tau_se: float
    gamma: float
    gamma_se: float
    hbar: float = 1.0
    status: str = "ok"
    assumption: str = "independent lineshape and decay datasets"

    def to_dict(self):
        def num(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")
        return {
            "product": self.product,
            "se": self.se,
            "pull": num(self.pull),
            "tau": self.tau,
            "tau_se": self.tau_se,
            "Gamma": self.gamma,
            "Gamma_se": self.gamma_se,
            "hbar": self.hbar,
            "status": self.status,
            "error_model": self.assumption,
        }


def ratio_from_values(tau, tau_se, gamma, gamma_se, hbar=1.0):
    """Propagation core of :func:`width_lifetime_ratio` on plain numbers."""
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    product = tau * gamma / hbar
    se = abs(product) * math.hypot(tau_se / tau, gamma_se / gamma)
    if se > 0:
        pull, status = (product - 1.0) / se, "ok"
    elif product == 1.0:
        pull, status = 0.0, "ok"
    else:
        pull, status = math.copysign(math.inf, product - 1.0), "inconsistent"
    return RatioReport(float(product), float(se), float(pull), float(tau), float(tau_se),
                       float(gamma), float(gamma_se), float(hbar), status)


def width_lifetime_ratio(lf, df, hbar=1.0):
    if not (lf.converged and df.converged):
        raise UnconvergedInput("both fits must have converged")
    return ratio_from_values(df.tau, df.standard_errors["tau"], lf.gamma,
                             lf.standard_errors["Gamma"], hbar)


def dumps(obj):
    """Stable JSON text for fit results and reports."""
    doc = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
