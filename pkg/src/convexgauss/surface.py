"""Gaussian surface integrals over convex-body boundaries.

The boundary-graph integral with surface density G1(f(y)) sqrt(1+|grad f|^2)
against the transverse Gaussian measure is evaluated three ways, picked by
the geometry of the projected domain:

* bounded domain (bounded body): polar nodes, radial Gauss-Jacobi with the
  w(s) = (1-s)^(-1/2) endpoint weight that absorbs the rim singularity of
  sqrt(1+|grad f|^2), angular trapezoid/Gauss-Legendre grids ("polar");
* full hyperplane, dimension <= 3: tensor Gauss-Hermite ("gauss_hermite");
* otherwise: Monte Carlo over the transverse Gaussian ("monte_carlo").

Also here: finite-dimensional-subspace boundary measures with the polar
section parameterization, total boundary measure, and the independent
Minkowski-content perimeter oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .bodies import ConvexBody
from .errors import (
    CaseError,
    DirectionError,
    OracleIntegrityError,
    ParameterError,
    UnsupportedOrderError,
)
from .graphs import GraphPair, _golden_min_gauge, _section_endpoints
from .space import GaussianModel, gaussian_density, map_chunks, sample_gaussian

DETERMINISTIC_METHODS = ("gauss_hermite", "polar", "closed_form")
DOMAIN_TRUNCATION_RADIUS = 12.0  # Gaussian tail mass beyond is < 1e-30

__all__ = [
    "EstimateWithError",
    "Budget",
    "area_formula_integral",
    "graph_surface_integral",
    "epigraph_perimeter",
    "subspace_hausdorff",
    "total_boundary_measure",
    "minkowski_content_perimeter",
]


@dataclass(frozen=True)
class EstimateWithError:
    """A numerical estimate with its uncertainty and reproducibility data."""

    value: float
    std_error: float
    n_samples: int
    seed: int
    method: str
    details: Optional[dict] = None

    def __post_init__(self):
        if self.std_error < 0:
            raise ParameterError("std_error must be nonnegative")
        if self.method in DETERMINISTIC_METHODS and self.std_error != 0.0:
            raise ParameterError(f"method {self.method} must report std_error 0")
        if self.method not in DETERMINISTIC_METHODS and self.method != "monte_carlo":
            raise ParameterError(f"unknown method {self.method!r}")

    def __add__(self, other: "EstimateWithError") -> "EstimateWithError":
        method = (
            "monte_carlo"
            if "monte_carlo" in (self.method, other.method)
            else ("polar" if "polar" in (self.method, other.method) else self.method)
        )
        return EstimateWithError(
            value=self.value + other.value,
            std_error=math.hypot(self.std_error, other.std_error),
            n_samples=max(self.n_samples, other.n_samples),
            seed=self.seed,
            method=method,
        )

    def scaled(self, factor: float) -> "EstimateWithError":
        return EstimateWithError(
            value=factor * self.value,
            std_error=abs(factor) * self.std_error,
            n_samples=self.n_samples,
            seed=self.seed,
            method=self.method,
            details=self.details,
        )


@dataclass(frozen=True)
class Budget:
    """Resolution knobs for the estimators; any field may come from a dict."""

    samples: int = 200_000
    quadrature_order: int = 64
    angles: int = 1024  # angular nodes for d=2 polar graph integrals
    sphere_grid: tuple = (64, 128)  # (polar, azimuthal) for d=3 graph integrals
    radial: int = 48
    inner_angles: int = 4096  # subspace sections, m=2
    inner_sphere_grid: tuple = (128, 256)  # subspace sections, m=3
    subspace_samples: int = 2000  # outer Monte Carlo draws for subspace measures
    epsilons: tuple = (0.08, 0.05, 0.03, 0.02)
    boundary_samples: int = 1000
    fd_step: float = 1e-5
    threads: int = 1

    @staticmethod
    def from_any(budget) -> "Budget":
        if budget is None:
            return Budget()
        if isinstance(budget, Budget):
            return budget
        if isinstance(budget, dict):
            known = {f for f in Budget.__dataclass_fields__}
            bad = set(budget) - known
            if bad:
                raise ParameterError(f"unknown budget fields: {sorted(bad)}")
            clean = dict(budget)
            for key in ("epsilons", "sphere_grid", "inner_sphere_grid"):
                if key in clean:
                    clean[key] = tuple(clean[key])
            return Budget(**clean)
        raise ParameterError(f"budget must be a Budget or dict, got {type(budget)}")


def _radial_rule(order: int):
    """Nodes s in (0,1) and weights for int_0^1 F(s) ds when F may carry an
    integrable (1-s)^(-1/2) rim singularity."""
    x, w = roots_jacobi(order, -0.5, 0.0)
    s = 0.5 * (x + 1.0)
    weights = (w / math.sqrt(2.0)) * np.sqrt(1.0 - s)
    return s, weights


def _angular_rule(d: int, budget: Budget, inner: bool = False):
    """Unit directions (K, d) and weights summing to the sphere area."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if d == 2:
        k = budget.inner_angles if inner else budget.angles
        theta = (np.arange(k) + 0.5) * (2.0 * math.pi / k)
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return u, np.full(k, 2.0 * math.pi / k)
    if d == 3:
        n_mu, n_th = budget.inner_sphere_grid if inner else budget.sphere_grid
        mu, glw = roots_legendre(n_mu)
        theta = (np.arange(n_th) + 0.5) * (2.0 * math.pi / n_th)
        mu_g, th_g = np.meshgrid(mu, theta, indexing="ij")
        sin_phi = np.sqrt(1.0 - mu_g**2)
        u = np.stack(
            [sin_phi * np.cos(th_g), sin_phi * np.sin(th_g), mu_g], axis=-1
        ).reshape(-1, 3)
        w = np.repeat(glw, n_th) * (2.0 * math.pi / n_th)
        return u, w
    raise UnsupportedOrderError(f"polar parameterization supports dim <= 3, got {d}")


def _select_graph(pair: GraphPair, which: str):
    if which not in ("upper", "lower"):
        raise ParameterError("which must be 'upper' or 'lower'")
    finite = pair.f_finite if which == "upper" else pair.g_finite
    if not finite:
        raise CaseError(f"the {which} graph is infinite (case {pair.case_tag})")


def _body_graph_values(pair, which, Y, t_hint=None):
    """Section-based f/g values at hyperplane points Y, with optional hints."""
    body = pair.body
    lower, upper, nonempty = _section_endpoints(
        body,
        pair.direction,
        Y,
        pair.section_tol,
        t_hint=t_hint,
        want_lower=which == "lower",
        want_upper=which == "upper",
    )
    vals = upper if which == "upper" else lower
    vals = np.where(nonempty, vals, np.nan)
    return vals, nonempty


def _body_graph_gradients(pair, which, Y, fd_steps, t_hint=None):
    """In-plane central-difference gradients of the section endpoint.

    Returns (ambient gradients (N, n), ok mask); rows where even the smallest
    shrunken stencil leaves the domain are flagged instead of raised so
    integrators can drop their (negligible-weight) nodes.
    """
    B = pair.basis
    N, d = Y.shape[0], B.shape[0]
    grads_c = np.full((N, d), np.nan)
    step = np.asarray(fd_steps, dtype=float) * np.ones(N)
    todo = np.ones(N, dtype=bool)
    for _ in range(7):
        if not todo.any():
            break
        idx = np.flatnonzero(todo)
        offsets = np.stack([B, -B], axis=0)  # (2, d, n)
        stencil = (
            Y[idx][:, None, None, :] + offsets[None, :, :, :] * step[idx, None, None, None]
        ).reshape(-1, Y.shape[1])
        hint = None
        if t_hint is not None:
            hint = np.repeat(t_hint[idx], 2 * d)
        vals, ok = _body_graph_values(pair, which, stencil, t_hint=hint)
        vals = vals.reshape(len(idx), 2, d)
        good = np.isfinite(vals).all(axis=(1, 2))
        if good.any():
            g = (vals[good, 0, :] - vals[good, 1, :]) / (2.0 * step[idx[good], None])
            grads_c[idx[good]] = g
            todo[idx[good]] = False
        step[todo] /= 8.0
        if float(step[todo].max(initial=0.0)) < 1e-10:
            break
    return grads_c @ B, ~todo


def _function_graph_values_gradients(pair, Y, fd_step):
    """Values/gradients for analytically-given graphs (upper only)."""
    vals = pair.f_eval(Y)
    ok = np.isfinite(vals)
    if pair.analytic_f_gradient is not None:
        grads = np.atleast_2d(np.asarray(pair.analytic_f_gradient(Y), dtype=float))
        return vals, grads, ok
    B = pair.basis
    d = B.shape[0]
    grads_c = np.full((Y.shape[0], d), np.nan)
    plus = pair.f_eval((Y[:, None, :] + fd_step * B[None, :, :]).reshape(-1, Y.shape[1]))
    minus = pair.f_eval((Y[:, None, :] - fd_step * B[None, :, :]).reshape(-1, Y.shape[1]))
    plus = plus.reshape(-1, d)
    minus = minus.reshape(-1, d)
    stencil_ok = np.isfinite(plus).all(axis=1) & np.isfinite(minus).all(axis=1)
    grads_c[stencil_ok] = (plus[stencil_ok] - minus[stencil_ok]) / (2.0 * fd_step)
    return vals, grads_c @ B, ok & stencil_ok


def _graph_normal(grads: np.ndarray, h: np.ndarray):
    """Unit vector (-grad + h)/sqrt(1+|grad|^2) field of a graph."""
    sq = 1.0 + np.sum(np.square(grads), axis=-1)
    root = np.sqrt(sq)
    return (h[None, :] - grads) / root[:, None], root


def _eval_surface_nodes(pair, which, Y, integrand2, fd_steps, t_hint=None):
    """Common node evaluation: returns per-node surface integrand
    phi(x, nu) * G1(val) * sqrt(1+|grad|^2) with a validity mask."""
    h = pair.direction
    if pair.body is not None:
        vals, ok = _body_graph_values(pair, which, Y, t_hint=t_hint)
        finite = ok & np.isfinite(vals)
        grads = np.zeros_like(Y)
        gok = np.zeros(Y.shape[0], dtype=bool)
        if finite.any():
            idx = np.flatnonzero(finite)
            g, ok2 = _body_graph_gradients(
                pair,
                which,
                Y[idx],
                np.asarray(fd_steps)[idx] if np.ndim(fd_steps) else fd_steps,
                t_hint=_inside_hint(pair, Y[idx], which, vals[idx], t_hint, idx),
            )
            grads[idx] = np.where(np.isfinite(g), g, 0.0)
            gok[idx] = ok2
        usable = finite & gok
    else:
        vals, grads, usable = _function_graph_values_gradients(
            pair, Y, float(np.min(fd_steps)) if np.ndim(fd_steps) else fd_steps
        )
    out = np.zeros(Y.shape[0])
    if usable.any():
        idx = np.flatnonzero(usable)
        nu, root = _graph_normal(grads[idx], h)
        x = Y[idx] + vals[idx][:, None] * h
        phi = np.asarray(integrand2(x, nu), dtype=float)
        out[idx] = phi * _g1(vals[idx]) * root
    return out, usable


def _inside_hint(pair, Y, which, vals, t_hint, idx):
    """A parameter strictly inside the section, for stencil bisection seeds."""
    if t_hint is not None:
        return np.asarray(t_hint)[idx]
    vals = np.asarray(vals)
    other_finite = pair.g_finite if which == "upper" else pair.f_finite
    if not other_finite:
        # the section is a ray: one unit inward is always inside
        return vals + (-1.0 if which == "upper" else 1.0)
    other = pair.g_eval(Y) if which == "upper" else pair.f_eval(Y)
    both = np.isfinite(other)
    return np.where(
        both,
        0.5 * (vals + np.where(both, other, 0.0)),
        vals + (-1.0 if which == "upper" else 1.0),
    )


def _g1(t):
    return np.exp(-0.5 * np.square(t)) / math.sqrt(2.0 * math.pi)


def _polar_graph_estimate(pair, which, integrand2, budget: Budget, seed: int):
    body = pair.body
    h, B = pair.direction, pair.basis
    d = B.shape[0]
    if d > 3:
        raise UnsupportedOrderError("polar graph integration supports dim <= 3")
    U_c, w_ang = _angular_rule(d, budget)
    U = U_c @ B
    t_at_min, q = _golden_min_gauge(body, U, h)
    if np.any(q <= 0.0):
        raise OracleIntegrityError("projected gauge vanished for a bounded body")
    rho = 1.0 / q
    t_rim = t_at_min * rho
    s, w_rad = _radial_rule(budget.radial)
    # nodes: (radial, angular)
    Yc = s[:, None, None] * (rho[None, :, None] * U_c[None, :, :])  # coords (R,K,d)
    Y = Yc.reshape(-1, d) @ B
    t_hint = (s[:, None] * t_rim[None, :]).reshape(-1)
    m0 = body.margin_at_zero
    fd = np.minimum(budget.fd_step, 0.2 * (1.0 - s)[:, None] * m0 * np.ones_like(rho)[None, :])
    contrib, usable = _eval_surface_nodes(
        pair, which, Y, integrand2, fd.reshape(-1), t_hint=t_hint
    )
    if np.mean(~usable) > 0.005:
        # every polar node lies strictly inside the projected domain, so more
        # than a sliver of failures means the oracle contradicts itself
        raise OracleIntegrityError(
            f"{int((~usable).sum())} of {usable.size} polar nodes of a bounded "
            "body produced no usable section"
        )
    contrib = contrib.reshape(len(s), len(w_ang))
    dens = gaussian_density(d, Yc.reshape(-1, d)).reshape(len(s), len(w_ang))
    radial_jac = (s[:, None] * rho[None, :]) ** (d - 1) * rho[None, :]
    total = float(np.sum(w_rad[:, None] * w_ang[None, :] * radial_jac * dens * contrib))
    return EstimateWithError(
        value=total,
        std_error=0.0,
        n_samples=len(s) * len(w_ang),
        seed=seed,
        method="polar",
        details={"angles": len(w_ang), "radial": len(s)},
    )


def _gh_graph_estimate(pair, which, integrand2, budget: Budget, seed: int):
    from .space import gauss_hermite_nodes

    d = pair.basis.shape[0]
    nodes_c, w = gauss_hermite_nodes(budget.quadrature_order, d)
    Y = nodes_c @ pair.basis
    fd = np.full(Y.shape[0], budget.fd_step)
    contrib, usable = _eval_surface_nodes(pair, which, Y, integrand2, fd)
    total = float(np.sum(w * contrib))
    return EstimateWithError(
        value=total,
        std_error=0.0,
        n_samples=len(w),
        seed=seed,
        method="gauss_hermite",
        details={"order": budget.quadrature_order},
    )


def _mc_graph_estimate(pair, which, integrand2, budget: Budget, seed: int):
    d = pair.basis.shape[0]
    coords = sample_gaussian(d, budget.samples, seed, threads=budget.threads)
    # truncate the transverse domain; the dropped tail mass is < 1e-30
    keep = np.linalg.norm(coords, axis=1) <= DOMAIN_TRUNCATION_RADIUS
    coords = np.where(keep[:, None], coords, 0.0)
    Y = coords @ pair.basis
    fd = np.full(Y.shape[0], budget.fd_step)
    contrib, usable = _eval_surface_nodes(pair, which, Y, integrand2, fd)
    contrib = np.where(keep, contrib, 0.0)
    mean = float(np.mean(contrib))
    se = float(np.std(contrib, ddof=1) / math.sqrt(len(contrib)))
    return EstimateWithError(
        value=mean,
        std_error=se,
        n_samples=budget.samples,
        seed=seed,
        method="monte_carlo",
    )


def graph_surface_integral(
    pair: GraphPair,
    which: str,
    integrand2: Callable[[np.ndarray, np.ndarray], np.ndarray],
    model: Optional[GaussianModel] = None,
    budget=None,
    seed: int = 0,
) -> EstimateWithError:
    """Surface integral over one boundary graph of phi(x, nu) d(surface),
    where nu is the graph normal (-grad + h)/sqrt(1 + |grad|^2).

    Dispatch: bounded body -> polar; hyperplane dim <= 3 -> Gauss-Hermite;
    higher dimension -> Monte Carlo.
    """
    budget = Budget.from_any(budget)
    _select_graph(pair, which)
    d = pair.basis.shape[0]
    if pair.body is not None and pair.body.bounded and d <= 3:
        return _polar_graph_estimate(pair, which, integrand2, budget, seed)
    if d <= 3:
        return _gh_graph_estimate(pair, which, integrand2, budget, seed)
    return _mc_graph_estimate(pair, which, integrand2, budget, seed)


def area_formula_integral(
    pair: GraphPair,
    which: str,
    integrand: Optional[Callable[[np.ndarray], np.ndarray]],
    model: Optional[GaussianModel] = None,
    budget=None,
    seed: int = 0,
) -> EstimateWithError:
    """Integral of a scalar function over one boundary graph against the
    Gaussian surface measure, via the graph parameterization
    int integrand(y + f(y) h) G1(f(y)) sqrt(1 + |grad f(y)|^2) dgamma_perp."""
    if integrand is None:
        fn = lambda x, nu: np.ones(x.shape[0])
    else:
        fn = lambda x, nu: np.asarray(integrand(x), dtype=float)
    return graph_surface_integral(pair, which, fn, model=model, budget=budget, seed=seed)


def epigraph_perimeter(
    graph,
    model: Optional[GaussianModel] = None,
    budget=None,
    seed: int = 0,
    which: str = "upper",
) -> EstimateWithError:
    """Gaussian perimeter of the region above a graph, inside its cylinder:
    the area-formula integral with integrand 1. `graph` is a GraphPair (use
    function_graph for an analytically given function)."""
    return area_formula_integral(graph, which, None, model=model, budget=budget, seed=seed)


def _inner_center(body, F, Ys, z0, reach):
    """Improve an inside point of each F-section to a robust center by
    per-axis endpoint bisection and midpointing (two passes)."""
    m = F.shape[0]
    z = z0.copy()
    for _ in range(2):
        for axis in range(m)[::-1]:
            e = F[axis]
            lo = _section_dir_bisect(body, Ys + z @ F, e, reach)
            hi = _section_dir_bisect(body, Ys + z @ F, -e, reach)
            shiftc = 0.5 * (lo - hi)
            z[:, axis] += shiftc
    return z


def _section_dir_bisect(body, X, u, reach, iters=60):
    """Distance from inside points X to the boundary along +u (clipped)."""
    lo = np.zeros(X.shape[0])
    hi = np.full(X.shape[0], reach)
    far_inside = body.contains(X + hi[:, None] * u)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = body.contains(X + mid[:, None] * u)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    out = 0.5 * (lo + hi)
    out[far_inside] = reach
    return out


def subspace_hausdorff(
    body: ConvexBody,
    F,
    region: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    budget=None,
    seed: int = 0,
    h=None,
    samples: Optional[int] = None,
) -> EstimateWithError:
    """Boundary measure through an m-dimensional subspace F (orthonormal rows,
    1 <= m <= 3): outer Monte Carlo over the complementary Gaussian, inner
    polar integral of G_m over the boundary of each m-dimensional section.

    With m == dim the outer integral is a point mass and the result is
    deterministic. `region` restricts the integral to ambient points where it
    returns True. When `h` is given it must lie in span(F).
    """
    budget = Budget.from_any(budget)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    m, n = F.shape
    if n != body.dim:
        raise ParameterError(f"F has ambient dim {n}, body has {body.dim}")
    if m < 1 or m > 3:
        raise UnsupportedOrderError(f"subspace dimension must be 1..3, got {m}")
    if not np.allclose(F @ F.T, np.eye(m), atol=1e-10):
        raise ParameterError("F rows must be orthonormal")
    if h is not None:
        h = np.asarray(h, dtype=float)
        resid = h - (h @ F.T) @ F
        if np.linalg.norm(resid) > 1e-9:
            raise DirectionError("h must lie in span(F)")

    outer_dim = n - m
    reach = body.reach * (1.0 + 1e-9) + 1.0
    if outer_dim == 0:
        Ys = np.zeros((1, n))
        n_samples = 1
    else:
        n_samples = samples if samples is not None else budget.subspace_samples
        X = sample_gaussian(n, n_samples, seed, threads=budget.threads)
        Ys = X - (X @ F.T) @ F

    # interior point of each section, in F coordinates
    z0 = np.zeros((Ys.shape[0], m))
    have = body.contains(Ys + z0 @ F)
    # lattice probe for sections missing the outer point
    if not have.all():
        grid1 = np.linspace(-0.8 * reach, 0.8 * reach, 7)
        lattice = np.stack(
            [g.ravel() for g in np.meshgrid(*([grid1] * m), indexing="ij")], axis=-1
        )
        missing = np.flatnonzero(~have)
        pts = Ys[missing][:, None, :] + (lattice @ F)[None, :, :]
        hits = body.contains(pts.reshape(-1, n)).reshape(len(missing), -1)
        anyhit = hits.any(axis=1)
        first = np.argmax(hits, axis=1)
        z0[missing[anyhit]] = lattice[first[anyhit]]
        have[missing[anyhit]] = True
    # golden sweeps along F axes for the still-missing (thin) sections
    if not have.all():
        missing = np.flatnonzero(~have)
        zi = z0[missing].copy()
        for _ in range(2):
            for axis in range(m):
                base = Ys[missing] + zi @ F - np.outer(zi[:, axis], F[axis])
                tt, _ = _golden_min_gauge(body, base, F[axis])
                zi[:, axis] = tt
        got = body.contains(Ys[missing] + zi @ F)
        z0[missing[got]] = zi[got]
        have[missing[got]] = True

    inner_vals = np.zeros(Ys.shape[0])
    act = np.flatnonzero(have)
    if act.size:
        if m == 1:
            z_in = z0[act, 0]
            base = Ys[act] + z0[act] @ F
            up = z_in + _section_dir_bisect(body, base, F[0], reach)
            lo = z_in - _section_dir_bisect(body, base, -F[0], reach)
            for endpoint in (up, lo):
                zpts = endpoint[:, None] * F[0]
                finite = np.abs(endpoint - z_in) < reach * (1 - 1e-9)
                weight = _gm(m, endpoint[:, None])
                if region is not None:
                    weight = weight * np.asarray(
                        region(Ys[act] + zpts), dtype=float
                    )
                inner_vals[act] += np.where(finite, weight, 0.0)
        else:
            zc = _inner_center(body, F, Ys[act], z0[act], reach)
            inner_vals[act] = _inner_polar_boundary(
                body, F, Ys[act], zc, region, budget, reach
            )
    if outer_dim == 0:
        return EstimateWithError(
            value=float(inner_vals[0]),
            std_error=0.0,
            n_samples=1,
            seed=seed,
            method="polar",
        )
    mean = float(np.mean(inner_vals))
    se = float(np.std(inner_vals, ddof=1) / math.sqrt(len(inner_vals)))
    return EstimateWithError(
        value=mean, std_error=se, n_samples=len(inner_vals), seed=seed, method="monte_carlo"
    )


def _gm(m, z):
    return gaussian_density(m, z)


def _inner_polar_boundary(body, F, Ys, zc, region, budget: Budget, reach):
    """Inner boundary integral of G_m over each section, polar around zc."""
    m = F.shape[0]
    U, w_ang = _angular_rule(m, budget, inner=True)
    n_rows = Ys.shape[0]
    out = np.zeros(n_rows)
    chunk = max(1, int(4_000_000 // max(1, U.shape[0])))
    for start in range(0, n_rows, chunk):
        sl = slice(start, min(n_rows, start + chunk))
        Yb = Ys[sl]
        zb = zc[sl]
        base = Yb + zb @ F  # ambient centers
        nb, K = base.shape[0], U.shape[0]
        centers = np.repeat(base, K, axis=0)
        dirs = np.tile(U @ F, (nb, 1))
        r = _section_dir_bisect(body, centers, dirs, reach).reshape(nb, K)
        # unreached rays (unbounded section): the Gaussian factor kills them
        zbnd = zb[:, None, :] + r[:, :, None] * U[None, :, :]
        gm = _gm(m, zbnd.reshape(-1, m)).reshape(nb, K)
        if region is not None:
            amb = centers + r.reshape(-1)[:, None] * dirs
            gm = gm * np.asarray(region(amb), dtype=float).reshape(nb, K)
        if m == 2:
            dth = 2.0 * math.pi / K
            dr = _periodic_gradient(r, dth)
            surfel = np.sqrt(r * r + dr * dr)
            out[sl] = np.sum(gm * surfel * dth, axis=1)
        else:
            n_mu, n_th = budget.inner_sphere_grid
            rg = r.reshape(nb, n_mu, n_th)
            mu, glw = roots_legendre(n_mu)
            dth = 2.0 * math.pi / n_th
            r_th = _periodic_gradient(rg.reshape(nb * n_mu, n_th), dth).reshape(
                nb, n_mu, n_th
            )
            r_mu = np.gradient(rg, mu, axis=1)
            sin_phi = np.sqrt(1.0 - mu**2)[None, :, None]
            r_phi = -sin_phi * r_mu
            grad_sq = r_phi**2 + (r_th / np.maximum(sin_phi, 1e-9)) ** 2
            surfel = rg * np.sqrt(rg * rg + grad_sq)
            w = (glw[None, :, None] * dth) * np.ones_like(rg)
            out[sl] = np.sum(
                gm.reshape(nb, n_mu, n_th) * surfel * w, axis=(1, 2)
            )
    return out


def _periodic_gradient(r, dx):
    return (np.roll(r, -1, axis=-1) - np.roll(r, 1, axis=-1)) / (2.0 * dx)


def total_boundary_measure(
    body: ConvexBody,
    pair: GraphPair,
    budget=None,
    seed: int = 0,
    max_vertical_mass: float = 0.01,
    check_vertical: bool = True,
) -> EstimateWithError:
    """Total Gaussian surface measure of the boundary: the sum of the
    area-formula integrals (integrand 1) over the finite graphs.

    Requires the direction's vertical boundary set to be negligible; a
    vertical-dominated direction (e.g. a cylinder along h) raises
    DirectionError naming the fix.
    """
    budget = Budget.from_any(budget)
    if not (pair.f_finite or pair.g_finite):
        raise DirectionError(
            "both graphs are infinite along this direction (cylinder-like body); "
            "pick a transverse direction"
        )
    if check_vertical and body.bounded:
        from .graphs import choose_direction

        _, vmass = choose_direction(
            body, [pair.direction], boundary_samples=budget.boundary_samples, seed=seed
        )
        if vmass.value - 3.0 * vmass.std_error > max_vertical_mass:
            raise DirectionError(
                f"vertical boundary mass {vmass.value:.3f} exceeds {max_vertical_mass}; "
                "choose a different direction"
            )
    total = None
    for which, finite in (("upper", pair.f_finite), ("lower", pair.g_finite)):
        if not finite:
            continue
        est = area_formula_integral(pair, which, None, budget=budget, seed=seed)
        total = est if total is None else total + est
    return total


def minkowski_content_perimeter(
    body: ConvexBody,
    epsilons: Sequence[float] = (0.08, 0.05, 0.03, 0.02),
    samples: int = 400_000,
    seed: int = 0,
    threads: int = 1,
) -> EstimateWithError:
    """Independent perimeter oracle: Gaussian content of epsilon-shells
    (gamma(body_eps) - gamma(body))/eps extrapolated to eps -> 0, with common
    random numbers across the epsilon grid.

    Requires an exact Euclidean distance oracle on the body (all shipped
    shapes provide one).
    """
    eps = np.asarray(sorted(epsilons, reverse=True), dtype=float)
    if len(eps) < 3:
        raise ParameterError("need at least 3 epsilon values")
    if np.any(eps <= 0) or np.any(eps > 0.1):
        raise ParameterError("epsilons must lie in (0, 0.1]")
    if body.distance_outside is None:
        raise ParameterError(
            f"body {body.shape_tag!r} has no distance oracle; the content "
            "perimeter needs exact Euclidean distances"
        )

    # chunked, deterministic: distances on common draws across all epsilons
    def chunk_stats(idx, size):
        rng = np.random.default_rng([seed, idx])
        x = rng.standard_normal((size, body.dim))
        d = np.asarray(body.distance_outside(x))
        return np.array([np.sum((d > 0) & (d < e)) for e in eps])

    counts = np.sum(map_chunks(chunk_stats, samples, threads=threads), axis=0)
    p_shell = counts / samples
    m = p_shell / eps
    se_m = np.sqrt(np.maximum(p_shell * (1 - p_shell), 1.0 / samples) / samples) / eps

    # weighted polynomial fits in eps; the intercept is the content
    wts = 1.0 / np.maximum(se_m, 1e-12) ** 2
    lin = np.polynomial.polynomial.polyfit(eps, m, 1, w=np.sqrt(wts))
    p_lin = lin[0]
    # intercept standard error from the weighted design
    X = np.stack([np.ones_like(eps), eps], axis=-1)
    cov = np.linalg.inv(X.T @ (wts[:, None] * X))
    se_lin = math.sqrt(cov[0, 0])
    extrap_err = 0.0
    if len(eps) >= 4:
        quad = np.polynomial.polynomial.polyfit(eps, m, 2, w=np.sqrt(wts))
        extrap_err = abs(quad[0] - p_lin)
    diffs = np.diff(m)
    noise = 3.0 * np.sqrt(se_m[1:] ** 2 + se_m[:-1] ** 2)
    if np.any(diffs > noise) and np.any(diffs < -noise):
        warnings.warn(
            "Minkowski-content table is non-monotone beyond noise; "
            "extrapolation may be unreliable",
            RuntimeWarning,
        )
    se = math.hypot(se_lin, extrap_err)
    return EstimateWithError(
        value=float(p_lin),
        std_error=float(se),
        n_samples=int(samples),
        seed=seed,
        method="monte_carlo",
        details={
            "epsilons": [float(e) for e in eps],
            "shell_rates": [float(v) for v in m],
            "shell_se": [float(v) for v in se_m],
            "extrapolation_error": float(extrap_err),
        },
    )
