"""Harmonic polynomials, radial differential operators, norms, quadrature.

A harmonic polynomial is stored as zonal atoms: its degree-k homogeneous
part is f_k(x) = sum_j c_j Z_k(x, eta_j) with unit-vector poles eta_j.
This representation is closed under the degree-diagonal operators used
throughout (each degree is simply rescaled) and evaluable in any dimension.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi, roots_legendre, hyp2f1

from . import kernelcore as kc
from ._backend import zonal_series
from .errors import ParameterError


# --------------------------------------------------------------------------
# harmonic polynomials


@dataclass
class HarmonicPolynomial:
    n: int
    # degree k -> list of (coefficient, unit pole)
    parts: dict = field(default_factory=dict)

    def max_degree(self) -> int:
        return max(self.parts, default=0)

    def scaled(self, factors: dict) -> "HarmonicPolynomial":
        """New polynomial with degree-k part multiplied by factors[k]."""
        out = {}
        for k, atoms in self.parts.items():
            fk = factors[k]
            out[k] = [(c * fk, eta) for c, eta in atoms]
        return HarmonicPolynomial(self.n, out)


def constant_poly(n: int, value: float = 1.0) -> HarmonicPolynomial:
    pole = np.zeros(n)
    pole[0] = 1.0
    return HarmonicPolynomial(n, {0: [(value, pole)]})


def evaluate_batch(f: HarmonicPolynomial, X) -> np.ndarray:
    """f(x) at each row of X, shape (N, n)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    nx2 = np.einsum("ij,ij->i", X, X)
    nu = (f.n - 2) / 2.0
    out = np.zeros(X.shape[0])
    for k, atoms in f.parts.items():
        onehot = np.zeros(k + 1)
        onehot[k] = 1.0
        for c, eta in atoms:
            out += c * zonal_series(onehot, nu, X @ eta, nx2)
    return out


def evaluate(f: HarmonicPolynomial, x) -> float:
    return float(evaluate_batch(f, np.asarray(x, dtype=np.float64)[None, :])[0])


def dts_apply(s: float, t: float, f: HarmonicPolynomial) -> HarmonicPolynomial:
    """Degree-diagonal operator: degree-k part scaled by gamma_k(s+t)/gamma_k(s)."""
    if not f.parts:
        return HarmonicPolynomial(f.n, {})
    kmax = f.max_degree()
    num = kc.gamma_coeffs(f.n, s + t, kmax)
    den = kc.gamma_coeffs(f.n, s, kmax)
    return f.scaled({k: num[k] / den[k] for k in f.parts})


def its_apply(s: float, t: float, f: HarmonicPolynomial, x) -> float:
    """(1-|x|^2)^t times the degree-rescaled polynomial at x (|x| < 1)."""
    x = np.asarray(x, dtype=np.float64)
    r2 = float(np.dot(x, x))
    if r2 >= 1.0:
        raise ValueError("point must lie in the open unit ball")
    return (1.0 - r2) ** t * evaluate(dts_apply(s, t, f), x)


def random_polynomial(n: int, max_degree: int, seed: int) -> HarmonicPolynomial:
    """Reproducible random combination of zonal atoms (normal coefficients)."""
    rng = np.random.default_rng(seed)
    parts = {}
    for k in range(max_degree + 1):
        natoms = 1 if k == 0 else 2
        atoms = []
        for _ in range(natoms):
            eta = rng.normal(size=n)
            eta /= np.linalg.norm(eta)
            atoms.append((float(rng.normal()), eta))
        parts[k] = atoms
    return HarmonicPolynomial(n, parts)


# --------------------------------------------------------------------------
# space parameters


@dataclass
class SpaceParams:
    n: int
    p: float
    alpha: float
    s: float
    t: float

    @property
    def flag_norm(self) -> bool:
        return self.alpha + self.p * self.t > -1.0

    @property
    def flag_proj(self) -> bool:
        return self.alpha + 1.0 < self.p * (self.s + 1.0)

    @property
    def flag_onenorm(self) -> bool:
        return (self.n + self.s + 1.0
                > self.n * max(1.0, 1.0 / self.p) + (1.0 + self.alpha) / self.p)


# --------------------------------------------------------------------------
# quadrature on the ball against the normalized weighted volume measure


@dataclass
class QuadratureRule:
    n: int
    weight_exponent: float
    points: np.ndarray   # (N, n)
    weights: np.ndarray  # (N,), sums to 1
    level: int
    kind: str
    exactness: dict
    radial_nodes: np.ndarray | None = None
    radial_weights: np.ndarray | None = None


def _radial_rule(n: int, alpha: float, m: int):
    """Nodes r_i and weights for the normalized radial measure.

    Integrates g(r) against (n/V_alpha) (1-r^2)^alpha r^{n-1} dr on (0, 1)
    exactly for g polynomial in r^2 of degree <= 2m-1; weights sum to 1.
    """
    xj, wj = roots_jacobi(m, alpha, n / 2.0 - 1.0)
    u = (xj + 1.0) / 2.0
    scale = (n / (2.0 * kc.v_alpha(n, alpha))) * 2.0 ** (-(alpha + n / 2.0))
    w = scale * wj
    w /= w.sum()  # exact normalization (sum is 1 up to rounding)
    return np.sqrt(u), w


def quadrature_build(n: int, weight_exponent: float, level: int = 64,
                     seed: int = 0) -> QuadratureRule:
    """Product rule integrating against the normalized weighted volume measure.

    n = 2: Gauss-Jacobi radial x equispaced angles (trig-exact).
    n = 3: Gauss-Jacobi radial x (Gauss-Legendre in cos(phi) x equispaced).
    n >= 4: stratified Monte Carlo with the weight folded into the weights.
    """
    if weight_exponent <= -1.0:
        raise ParameterError("weight exponent > -1",
                             f"weight exponent {weight_exponent} not integrable")
    alpha = float(weight_exponent)
    if n == 2:
        r, wr = _radial_rule(n, alpha, level)
        M = 4 * level
        theta = 2.0 * np.pi * np.arange(M) / M
        circ = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        pts = (r[:, None, None] * circ[None, :, :]).reshape(-1, 2)
        wts = np.repeat(wr / M, M)
        exact = {"radial_degree_r2": 2 * level - 1, "angular_trig_degree": M - 1}
        return QuadratureRule(n, alpha, pts, wts, level, "product", exact, r, wr)
    if n == 3:
        r, wr = _radial_rule(n, alpha, level)
        L = level
        ct, wt = roots_legendre(L)
        M = 2 * level
        theta = 2.0 * np.pi * np.arange(M) / M
        st = np.sqrt(1.0 - ct**2)
        dirs = np.stack([
            np.outer(st, np.cos(theta)).ravel(),
            np.outer(st, np.sin(theta)).ravel(),
            np.repeat(ct, M),
        ], axis=1)
        dw = np.repeat(wt / 2.0, M) / M
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        wts = (wr[:, None] * dw[None, :]).ravel()
        exact = {"radial_degree_r2": 2 * level - 1, "sphere_degree": min(2 * L - 1, M - 1)}
        return QuadratureRule(n, alpha, pts, wts, level, "product", exact, r, wr)
    # n >= 4: stratified Monte Carlo against the unweighted uniform measure
    rng = np.random.default_rng(seed)
    N = 2000 * level
    u = (np.arange(N) + rng.uniform(size=N)) / N
    r = u ** (1.0 / n)
    dirs = rng.normal(size=(N, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = r[:, None] * dirs
    wts = (1.0 - r**2) ** alpha / (kc.v_alpha(n, alpha) * N)
    return QuadratureRule(n, alpha, pts, wts, level, "montecarlo",
                          {"samples": N})


def integrate(rule: QuadratureRule, values) -> float:
    """Integral of sampled values against the rule's normalized measure."""
    if callable(values):
        values = values(rule.points)
    return float(np.dot(rule.weights, values))


def integrate_adaptive(n: int, weight_exponent: float, func, level: int = 64,
                       rtol: float = 1e-9, max_doublings: int = 4) -> float:
    """Self-checking integral: level doubles until successive values agree."""
    prev = None
    for _ in range(max_doublings + 1):
        rule = quadrature_build(n, weight_exponent, level)
        val = integrate(rule, func)
        if prev is not None and abs(val - prev) <= rtol * max(1.0, abs(val)):
            return val
        prev = val
        level *= 2
    return prev


# --------------------------------------------------------------------------
# norms, inner products, projection


def besov_norm(params: SpaceParams, f: HarmonicPolynomial,
               rule: QuadratureRule | None = None) -> float:
    """Norm of f: (1/V_alpha) int |D f|^p (1-|x|^2)^{alpha+pt} dnu, p-th root."""
    if not params.flag_norm:
        raise ParameterError("Eq. (1.4)",
                             f"alpha + p*t = {params.alpha + params.p * params.t} <= -1")
    w = params.alpha + params.p * params.t
    if rule is None:
        rule = quadrature_build(params.n, w)
    if abs(rule.weight_exponent - w) > 1e-12:
        raise ValueError("rule weight exponent must equal alpha + p*t")
    if not f.parts:
        return 0.0
    df = dts_apply(params.s, params.t, f)
    vals = np.abs(evaluate_batch(df, rule.points)) ** params.p
    pref = kc.v_alpha(params.n, w) / kc.v_alpha(params.n, params.alpha)
    return float((pref * integrate(rule, vals)) ** (1.0 / params.p))


def radial_moment(n: int, w: float, k: int) -> float:
    """Moment of |x|^{2k} against the normalized weight-w volume measure.

    Equals B(k + n/2, w + 1)/B(n/2, w + 1) = (n/2)_k / (n/2 + w + 1)_k.
    """
    return kc.pochhammer(n / 2.0, k) / kc.pochhammer(n / 2.0 + w + 1.0, k)


def inner_product_u(alpha: float, s: float, u: float,
                    f: HarmonicPolynomial, g: HarmonicPolynomial,
                    rule: QuadratureRule | None = None) -> float:
    """Pairing int (I f)(I g) dnu_alpha with order-u operators (quadrature)."""
    Phi = alpha + 2.0 * u
    if Phi <= -1.0:
        raise ParameterError("alpha + 2u > -1", f"alpha + 2u = {Phi} <= -1")
    if rule is None:
        rule = quadrature_build(f.n, Phi)
    df = dts_apply(s, u, f)
    dg = dts_apply(s, u, g)
    vals = evaluate_batch(df, rule.points) * evaluate_batch(dg, rule.points)
    pref = kc.v_alpha(f.n, Phi) / kc.v_alpha(f.n, alpha)
    return pref * integrate(rule, vals)


def inner_product_u_closed(alpha: float, s: float, u: float,
                           f: HarmonicPolynomial, g: HarmonicPolynomial) -> float:
    """Exact value of the order-u pairing, by degree orthogonality.

    For same-degree zonal atoms the sphere average of Z_k(., eta) Z_k(., xi)
    is Z_k(eta, xi); different degrees are orthogonal, and the radial factor
    is the closed-form moment of |x|^{2k}.
    """
    n = f.n
    Phi = alpha + 2.0 * u
    if Phi <= -1.0:
        raise ParameterError("alpha + 2u > -1", f"alpha + 2u = {Phi} <= -1")
    kmax = max(f.max_degree(), g.max_degree())
    gam_su = kc.gamma_coeffs(n, s + u, kmax)
    gam_s = kc.gamma_coeffs(n, s, kmax)
    pref = kc.v_alpha(n, Phi) / kc.v_alpha(n, alpha)
    total = 0.0
    for k in f.parts:
        if k not in g.parts:
            continue
        cross = 0.0
        for c, eta in f.parts[k]:
            for d, xi in g.parts[k]:
                cross += c * d * kc.zonal(n, k, eta, xi)
        ratio = gam_su[k] / gam_s[k]
        total += ratio**2 * radial_moment(n, Phi, k) * cross
    return pref * total


def project(Phi: float, f: HarmonicPolynomial, x,
            rule: QuadratureRule | None = None, tol: float = 1e-10) -> float:
    """Kernel projection integral at x; reproduces harmonic polynomials."""
    if Phi <= -1.0:
        raise ParameterError("weight exponent > -1", f"Phi = {Phi} <= -1")
    if rule is None:
        rule = quadrature_build(f.n, Phi)
    x = np.asarray(x, dtype=np.float64)
    kvals = kc.kernel_eval_batch(f.n, Phi, x, rule.points, tol)
    return float(np.dot(rule.weights, kvals * evaluate_batch(f, rule.points)))


# --------------------------------------------------------------------------
# radius scans for the kernel-growth estimates


def fit_slope(one_minus_r2: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log(values) against log(one_minus_r2)."""
    lx = np.log(np.asarray(one_minus_r2, dtype=np.float64))
    ly = np.log(np.asarray(values, dtype=np.float64))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    sol, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(sol[0])


@dataclass
class ScanResult:
    radii: np.ndarray
    one_minus_r2: np.ndarray
    values: np.ndarray
    slope: float
    max_min_ratio: float
    predicted_exponent: float


def _kernel_power_integral_p2(n: int, alpha: float, beta: float, r: float) -> float:
    """Exact series for int |R_alpha(x, .)|^2 (1-|y|^2)^beta dnu, |x| = r."""
    # choose truncation from the plain-kernel planner at q = r (terms decay
    # at least as fast once multiplied by the moment ratio, which is <= 1)
    K = kc.plan_terms(n, alpha, r * r, 1e-14) + 16
    gam = kc.gamma_coeffs(n, alpha, K)
    h = kc.hdim_coeffs(n, K)
    ks = np.arange(K + 1)
    # radial moments m_k(beta) via cumulative ratio (n/2 + k)/(n/2 + beta + 1 + k)
    ratios = (n / 2.0 + ks) / (n / 2.0 + beta + 1.0 + ks)
    m = np.concatenate(([1.0], np.cumprod(ratios[:-1])))
    terms = gam**2 * h * r ** (2 * ks) * m
    return kc.v_alpha(n, beta) * float(terms.sum())


def _kernel_power_integral_fft(n: int, alpha: float, p: float, beta: float,
                               r: float, level: int = 512,
                               angular: int = 4096) -> float:
    """n=2 path for general p: aliased angular series + Gauss-Jacobi radial."""
    assert n == 2
    prev = None
    for _ in range(4):
        rho, wr = _radial_rule(2, beta, level)
        total = 0.0
        for rho_i, w_i in zip(rho, wr):
            q = r * rho_i
            if q == 0.0:
                total += w_i
                continue
            K = kc.plan_terms(2, alpha, q, 1e-12 * max(1.0, (1 - q) ** (-(2 + alpha))))
            gam = kc.gamma_coeffs(2, alpha, K)
            b = 2.0 * gam * q ** np.arange(K + 1)
            b[0] = 1.0
            B = np.zeros(angular, dtype=np.float64)
            np.add.at(B, np.arange(K + 1) % angular, b)
            fvals = np.fft.ifft(B).real * angular
            total += w_i * float(np.mean(np.abs(fvals) ** p))
        val = kc.v_alpha(2, beta) * total
        if prev is not None and abs(val - prev) <= 1e-6 * abs(val):
            return val
        prev = val
        level *= 2
        angular *= 2
    return prev


def kernel_norm_scan(alpha: float, p: float, beta: float, radii,
                     n: int = 2, level: int = 64) -> ScanResult:
    """Weighted p-th power integrals of kernel sections along a radius list.

    The growth exponent is c = p(alpha + n) - (beta + n): decay like
    (1-|x|^2)^{-c} for c > 0, log growth at c = 0, bounded for c < 0.
    """
    if beta <= -1.0:
        raise ParameterError("weight exponent > -1", f"beta = {beta} <= -1")
    radii = np.asarray(radii, dtype=np.float64)
    vals = np.empty_like(radii)
    if p == 2:
        for i, r in enumerate(radii):
            vals[i] = _kernel_power_integral_p2(n, alpha, beta, float(r))
    elif n == 2:
        for i, r in enumerate(radii):
            vals[i] = _kernel_power_integral_fft(2, alpha, p, beta, float(r))
    else:
        rule = quadrature_build(n, beta, level)
        for i, r in enumerate(radii):
            x = np.zeros(n)
            x[0] = r
            kv = np.abs(kc.kernel_eval_batch(n, alpha, x, rule.points, 1e-10)) ** p
            vals[i] = kc.v_alpha(n, beta) * integrate(rule, kv)
    om = 1.0 - radii**2
    c = p * (alpha + n) - (beta + n)
    return ScanResult(radii, om, vals, fit_slope(om, vals),
                      float(vals.max() / vals.min()), -c)


def _bracket_angular_mean(n: int, sigma: float, q: float) -> float:
    """Sphere average of [x, y]^(-sigma) over directions at radius product q."""
    if q == 0.0:
        return 1.0
    if n == 2:
        return float(hyp2f1(sigma / 2.0, sigma / 2.0, 1.0, q * q))
    if n == 3:
        if abs(sigma - 2.0) < 1e-12:
            return float(np.log((1 + q) / (1 - q)) / (2 * q))
        e = 1.0 - sigma / 2.0
        return float(((1 - q) ** (2 * e) - (1 + q) ** (2 * e)) / (4 * q * e))
    raise NotImplementedError("closed angular mean implemented for n in {2,3}")


def bracket_integral_scan(beta: float, s_exp: float, radii,
                          n: int = 2, level: int = 512) -> ScanResult:
    """Weighted bracket-power integrals along a radius list.

    Integrand (1-|y|^2)^beta / [x,y]^(beta+n+s_exp); growth exponent s_exp
    (decay (1-|x|^2)^{-s_exp} for s_exp > 0, log at 0, bounded below 0).
    """
    if beta <= -1.0:
        raise ParameterError("weight exponent > -1", f"beta = {beta} <= -1")
    radii = np.asarray(radii, dtype=np.float64)
    sigma = beta + n + s_exp
    vals = np.empty_like(radii)
    for i, r in enumerate(radii):
        prev = None
        m = level
        while True:
            rho, wr = _radial_rule(n, beta, m)
            means = np.array([_bracket_angular_mean(n, sigma, float(r * t))
                              for t in rho])
            val = kc.v_alpha(n, beta) * float(np.dot(wr, means))
            if prev is not None and abs(val - prev) <= 1e-8 * abs(val) or m > 16 * level:
                break
            prev = val
            m *= 2
        vals[i] = val
    om = 1.0 - radii**2
    return ScanResult(radii, om, vals, fit_slope(om, vals),
                      float(vals.max() / vals.min()), -s_exp)
