"""Pseudohyperbolic metric, Mobius maps, metric balls, covering lattices."""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import roots_legendre

from . import kernelcore as kc


def bracket(x, y) -> float:
    """[x, y] = sqrt(1 - 2 x.y + |x|^2 |y|^2); symmetric, [x, x] = 1 - |x|^2."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    v = 1.0 - 2.0 * float(np.dot(x, y)) + float(np.dot(x, x)) * float(np.dot(y, y))
    return math.sqrt(max(v, 0.0))


def bracket_batch(x, Y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    v = 1.0 - 2.0 * (Y @ x) + float(np.dot(x, x)) * np.einsum("ij,ij->i", Y, Y)
    return np.sqrt(np.maximum(v, 0.0))


def mobius(a, x) -> np.ndarray:
    """Involutive Mobius map of the ball exchanging a and 0."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    d = a - x
    b2 = 1.0 - 2.0 * float(np.dot(x, a)) + float(np.dot(x, x)) * float(np.dot(a, a))
    return ((1.0 - float(np.dot(a, a))) * d + float(np.dot(d, d)) * a) / b2


def rho(x, y) -> float:
    """Pseudohyperbolic distance |x - y| / [x, y], in [0, 1) inside the ball."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    b = bracket(x, y)
    if b == 0.0:
        return 0.0
    return float(np.linalg.norm(x - y)) / b


def rho_batch(x, Y) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    b = bracket_batch(x, Y)
    d = np.linalg.norm(Y - x[None, :], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(b > 0, d / np.where(b > 0, b, 1.0), 0.0)
    return out


@dataclass
class PseudoBall:
    center_x: np.ndarray
    delta: float
    euclid_center: np.ndarray
    euclid_radius: float


def pseudoball(x, delta: float) -> PseudoBall:
    """The metric ball of radius delta at x, as an explicit Euclidean ball."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    x = np.asarray(x, dtype=np.float64)
    r2 = float(np.dot(x, x))
    denom = 1.0 - delta**2 * r2
    c = (1.0 - delta**2) * x / denom
    r = (1.0 - r2) * delta / denom
    return PseudoBall(x, float(delta), c, float(r))


# --------------------------------------------------------------------------
# weighted volume of a metric ball


def weighted_ball_volume(alpha: float, ball: PseudoBall, level: int = 48) -> float:
    """Weighted normalized volume of the ball (polar rule about its center)."""
    if alpha <= -1.0:
        raise ValueError("weight exponent must exceed -1")
    n = ball.euclid_center.shape[0]
    c, re = ball.euclid_center, ball.euclid_radius
    t, wt = roots_legendre(level)
    r = re * (t + 1.0) / 2.0
    wr = wt * re / 2.0
    if n == 2:
        M = 4 * level
        theta = 2.0 * np.pi * np.arange(M) / M
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        pts = (c[None, None, :] + r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        w = np.repeat(wr * r * (2.0 * np.pi / M), M)
        volB = math.pi
    elif n == 3:
        ctn, wc = roots_legendre(level)
        M = 2 * level
        theta = 2.0 * np.pi * np.arange(M) / M
        st = np.sqrt(1.0 - ctn**2)
        dirs = np.stack([
            np.outer(st, np.cos(theta)).ravel(),
            np.outer(st, np.sin(theta)).ravel(),
            np.repeat(ctn, M),
        ], axis=1)
        dw = np.repeat(wc, M) * (2.0 * np.pi / M)
        pts = (c[None, None, :] + r[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        w = (wr[:, None] * (r[:, None] ** 2 * dw[None, :])).ravel()
        volB = 4.0 * math.pi / 3.0
    else:
        raise NotImplementedError("ball quadrature implemented for n in {2, 3}")
    r2 = np.einsum("ij,ij->i", pts, pts)
    vals = np.where(r2 < 1.0, (1.0 - np.minimum(r2, 1.0)) ** alpha, 0.0)
    return float(np.dot(w, vals)) / (kc.v_alpha(n, alpha) * volB)


# --------------------------------------------------------------------------
# covering lattices


@dataclass
class Lattice:
    n: int
    delta: float
    rmax: float
    multiplicity_bound: int
    points: np.ndarray  # (N, n), origin first


def _conflict_radius(delta: float, one_minus_r2) -> np.ndarray:
    """Euclidean radius certainly containing all points within metric delta."""
    return delta * (1.0 + delta) / (1.0 - delta) * np.asarray(one_minus_r2)


def _shell_radii(delta: float, rmax: float):
    d = delta / 2.0
    radii = [0.0]
    r = 0.0
    while r < rmax:
        r = (r + d) / (1.0 + r * d)
        if r >= rmax:
            break
        radii.append(r)
    return radii


def _shell_candidates(n: int, r: float, delta: float, rng_order=None):
    """Deterministic candidate directions, lexicographic angular order."""
    if r == 0.0:
        return np.zeros((1, n))
    step = delta * (1.0 - r**2) / (4.0 * r)
    if n == 2:
        M = max(8, int(math.ceil(2.0 * math.pi / step)))
        theta = 2.0 * np.pi * np.arange(M) / M
        return r * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if n == 3:
        # Fibonacci sphere, ordered by polar angle then azimuth
        N = max(16, int(math.ceil(16.0 / step**2)))
        i = np.arange(N)
        z = 1.0 - 2.0 * (i + 0.5) / N
        phi = i * (math.pi * (3.0 - math.sqrt(5.0)))
        st = np.sqrt(1.0 - z**2)
        return r * np.stack([st * np.cos(phi), st * np.sin(phi), z], axis=1)
    raise NotImplementedError("lattice generation implemented for n in {2, 3}")


def lattice_gen(n: int, delta: float, rmax: float,
                multiplicity_bound: int = 64,
                max_points: int = 2_000_000) -> Lattice:
    """Greedy maximal delta-separated net on metrically equispaced shells.

    Deterministic for fixed (n, delta, rmax): the origin is taken first,
    shells are processed outward, and candidates on each shell in
    lexicographic angular order.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < rmax < 1.0:
        raise ValueError("rmax must lie in (0, 1)")
    radii = _shell_radii(delta, rmax)
    est = sum(max(1.0, 4.0 * (r / (delta * (1 - r**2)))) ** (n - 1) * 4 for r in radii)
    if est > max_points:
        raise ValueError(
            f"estimated lattice size {est:.2e} exceeds max_points={max_points}; "
            "use a smaller horizon")
    accepted = [np.zeros(n)]
    for r in radii[1:]:
        cand = _shell_candidates(n, r, delta)
        prev = np.array(accepted)
        tree = cKDTree(prev)
        crad = float(_conflict_radius(delta, 1.0 - r**2))
        near_prev = tree.query_ball_point(cand, crad + delta * (1 - r**2))
        # same-shell accepted points, hashed on a grid of cell size crad
        cell = max(crad, 1e-12)
        grid: dict = {}
        shell_pts = []
        for idx in range(cand.shape[0]):
            x = cand[idx]
            ok = True
            neigh = near_prev[idx]
            if neigh:
                if np.min(rho_batch(x, prev[neigh])) < delta:
                    ok = False
            if ok and shell_pts:
                key = tuple((x // cell).astype(np.int64))
                local = []
                for off in _grid_offsets(n):
                    local.extend(grid.get(tuple(np.add(key, off)), ()))
                if local and np.min(rho_batch(x, np.array([shell_pts[j] for j in local]))) < delta:
                    ok = False
            if ok:
                if shell_pts is not None:
                    key = tuple((x // cell).astype(np.int64))
                    grid.setdefault(key, []).append(len(shell_pts))
                shell_pts.append(x)
                accepted.append(x)
        if len(accepted) > max_points:
            raise ValueError("lattice grew past max_points")
    # Repair pass toward maximality: any sampled point at distance >= delta
    # from every accepted point is itself a legal lattice point; adding it
    # preserves separation and plugs coverage gaps left by the candidate grid.
    # Rounds continue until a full round finds no gap.
    rng = np.random.default_rng(20_000 + n)
    clean_rounds = 0
    for _ in range(25):
        m = min(max(100 * len(accepted), 200_000), 500_000)
        dirs = rng.normal(size=(m, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        # stratified radii: Euclidean-uniform, metric-uniform, and a dense
        # sweep of the outermost half-step band where truncation leaves
        # slivers that are negligible in Euclidean area
        rr = rmax * rng.uniform(size=m) ** (1.0 / n)
        half, quart = m // 2, m // 4
        rr[:half] = np.tanh(rng.uniform(0.0, math.atanh(rmax), half))
        d = delta / 2.0
        rim0 = (rmax - d) / (1.0 - rmax * d)
        rr[half:half + quart] = rng.uniform(rim0, rmax, quart)
        X = rr[:, None] * dirs
        pts = np.array(accepted)
        gaps = X[_uncovered_mask(pts, X, delta)]
        added = 0
        for x in gaps:
            recent = np.array(accepted[pts.shape[0]:]) if len(accepted) > pts.shape[0] else None
            if recent is not None and recent.size \
                    and float(np.min(rho_batch(x, recent))) < delta:
                continue
            accepted.append(x)
            added += 1
        clean_rounds = clean_rounds + 1 if added == 0 else 0
        if clean_rounds >= 3:
            break
    return Lattice(n, float(delta), float(rmax), int(multiplicity_bound),
                   np.array(accepted))


def _uncovered_mask(pts: np.ndarray, X: np.ndarray, delta: float) -> np.ndarray:
    """Boolean mask of rows of X at metric distance >= delta from all of pts.

    Fast path through the k nearest Euclidean neighbors; the rare samples not
    settled there fall back to an exact conflict-radius ball query.
    """
    tree = cKDTree(pts)
    k = min(16, pts.shape[0])
    _, idx = tree.query(X, k=k)
    idx = np.atleast_2d(idx.reshape(X.shape[0], -1))
    P = pts[idx]                                    # (m, k, n)
    diff = np.linalg.norm(P - X[:, None, :], axis=2)
    b2 = (1.0 - 2.0 * np.einsum("mkj,mj->mk", P, X)
          + np.einsum("mkj,mkj->mk", P, P)
          * np.einsum("mj,mj->m", X, X)[:, None])
    rho_near = diff / np.sqrt(np.maximum(b2, 1e-300))
    maybe = rho_near.min(axis=1) >= delta
    out = np.zeros(X.shape[0], dtype=bool)
    for i in np.flatnonzero(maybe):
        x = X[i]
        crad = float(_conflict_radius(delta, 1.0 - float(np.dot(x, x))))
        near = tree.query_ball_point(x, crad)
        out[i] = not (near and float(np.min(rho_batch(x, pts[near]))) < delta)
    return out


def _grid_offsets(n: int):
    from itertools import product
    return list(product((-1, 0, 1), repeat=n))


def lattice_separation(lat: Lattice) -> float:
    """Minimum pairwise metric distance (full audit, neighbor-accelerated)."""
    pts = lat.points
    tree = cKDTree(pts)
    one_minus = 1.0 - np.einsum("ij,ij->i", pts, pts)
    rads = _conflict_radius(lat.delta * 1.05, one_minus)
    best = 1.0
    for i in range(pts.shape[0]):
        idx = [j for j in tree.query_ball_point(pts[i], float(rads[i])) if j > i]
        if idx:
            best = min(best, float(np.min(rho_batch(pts[i], pts[idx]))))
    return best


def lattice_coverage(lat: Lattice, samples: int = 10_000, seed: int = 0):
    """Monte Carlo coverage/multiplicity audit inside the horizon.

    Returns (uncovered_count, max_multiplicity) over uniform samples of the
    Euclidean ball of radius rmax.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(samples, lat.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = lat.rmax * rng.uniform(size=samples) ** (1.0 / lat.n)
    X = r[:, None] * dirs
    tree = cKDTree(lat.points)
    uncovered = 0
    maxmult = 0
    for i in range(samples):
        x = X[i]
        crad = float(_conflict_radius(lat.delta, 1.0 - float(np.dot(x, x))))
        idx = tree.query_ball_point(x, crad)
        mult = 0
        if idx:
            d = rho_batch(x, lat.points[idx])
            mult = int(np.sum(d < lat.delta))
        if mult == 0:
            uncovered += 1
        maxmult = max(maxmult, mult)
    return uncovered, maxmult


def lattice_to_json(lat: Lattice) -> str:
    doc = {
        "n": lat.n,
        "delta": lat.delta,
        "rmax": lat.rmax,
        "multiplicity_bound": lat.multiplicity_bound,
        "points": [[float(v) for v in p] for p in lat.points],
    }
    return json.dumps(doc, indent=None, separators=(",", ":"))


def lattice_from_json(text: str) -> Lattice:
    doc = json.loads(text)
    return Lattice(int(doc["n"]), float(doc["delta"]), float(doc["rmax"]),
                   int(doc["multiplicity_bound"]),
                   np.asarray(doc["points"], dtype=np.float64))
