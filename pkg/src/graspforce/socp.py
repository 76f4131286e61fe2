"""Exact second-order cone solver for the contact force problem.

`solve` runs a log-barrier path-following interior-point method directly on
the per-contact cones: the standard self-concordant barriers -log(u - lo),
-log(hi - u) and -log(mu^2 u^2 - |v|^2) for each contact, Newton centering,
and a geometric schedule on the path parameter.  The barrier complexity nu
gives a duality-gap certificate: at a centered iterate the objective is within
nu/t of the true minimum, and the solver stops once that bound drops below
opt_tol * (1 + |objective|).  Iterates are strictly feasible throughout, so
cone and box residuals of the returned force are zero up to roundoff.

Contacts whose normal-force box has (numerically) collapsed -- an adaptive
lower bound saturated at gamma_up, or a separated contact with
gamma_up == 0 -- are pinned in a presolve step: the normal component is fixed
and the tangential pair, if any freedom remains, is optimized inside the disc
|v| <= mu * u_pin.

`oracle_solve` is the independent correctness check: exhaustive per-contact
grid search (normal magnitude, tangential fraction of the cone radius,
tangential angle) swept block-coordinate-wise until no block improves, then
two rounds of local grid refinement around the incumbent.  Every candidate is
feasible by construction, so the returned objective upper-bounds the true
minimum and tightens as the grid refines.  Block sweeps converge to the
global optimum here because the objective is smooth and convex and the
constraint set is a product of per-contact sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from graspforce import cone_program
from graspforce.cone_program import ConeProblem

_PIN_REL_TOL = 1e-9
_CENTER_TOL = 1e-4      # squared Newton decrement at which a point counts as centered
_PATH_MULTIPLIER = 30.0


@dataclass(frozen=True)
class SolverSettings:
    """Interior-point termination controls."""

    feas_tol: float = 1e-8
    opt_tol: float = 1e-8
    max_iters: int = 200

    def __post_init__(self):
        if self.feas_tol <= 0.0 or self.opt_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class Solution:
    """Solver output: stacked local forces plus optimality/feasibility evidence."""

    f: np.ndarray
    status: str  # "optimal" | "max_iters" | "infeasible"
    iterations: int
    objective_value: float
    max_cone_residual: float


class _Blocks:
    """Presolved variable layout: which coordinates are free, disc-bound, or fixed."""

    def __init__(self, lo, hi, mu):
        self.entries = []       # (kind, contact index, offset in z, extra)
        self.var_coords = []    # full-x coordinate of each z entry
        self.x_fixed = np.zeros(3 * len(lo))
        self.nu = 0.0
        for i in range(len(lo)):
            pin_tol = _PIN_REL_TOL * max(1.0, hi[i])
            if hi[i] - lo[i] <= pin_tol:
                u_pin = 0.5 * (lo[i] + hi[i])
                self.x_fixed[3 * i] = u_pin
                radius = mu[i] * u_pin
                if radius <= 1e-12:
                    self.entries.append(("fixed", i, None, None))
                else:
                    self.entries.append(("disc", i, len(self.var_coords), radius))
                    self.var_coords.extend([3 * i + 1, 3 * i + 2])
                    self.nu += 2.0
            else:
                self.entries.append(("free", i, len(self.var_coords), None))
                self.var_coords.extend([3 * i, 3 * i + 1, 3 * i + 2])
                self.nu += 4.0
        self.var_coords = np.asarray(self.var_coords, dtype=int)

    @property
    def dim(self) -> int:
        return len(self.var_coords)

    def expand(self, z: np.ndarray) -> np.ndarray:
        x = self.x_fixed.copy()
        if self.dim:
            x[self.var_coords] = z
        return x


def _barrier_terms(blocks: _Blocks, z: np.ndarray, lo, hi, mu):
    """Barrier value, gradient, and Hessian at z, or None when z is infeasible."""
    k = blocks.dim
    zf = z.tolist()
    value = 0.0
    grad = np.zeros(k)
    hess = np.zeros((k, k))
    for kind, i, off, extra in blocks.entries:
        if kind == "fixed":
            continue
        if kind == "disc":
            v2, v3 = zf[off], zf[off + 1]
            s = extra * extra - v2 * v2 - v3 * v3
            if s <= 0.0:
                return None
            value -= math.log(s)
            inv = 1.0 / s
            inv2 = inv * inv
            grad[off] = 2.0 * v2 * inv
            grad[off + 1] = 2.0 * v3 * inv
            hess[off, off] = 4.0 * v2 * v2 * inv2 + 2.0 * inv
            hess[off + 1, off + 1] = 4.0 * v3 * v3 * inv2 + 2.0 * inv
            h23 = 4.0 * v2 * v3 * inv2
            hess[off, off + 1] = h23
            hess[off + 1, off] = h23
            continue
        u, v2, v3 = zf[off], zf[off + 1], zf[off + 2]
        a1 = u - lo[i]
        a2 = hi[i] - u
        mu2 = mu[i] * mu[i]
        s = mu2 * u * u - v2 * v2 - v3 * v3
        if a1 <= 0.0 or a2 <= 0.0 or s <= 0.0:
            return None
        value -= math.log(a1) + math.log(a2) + math.log(s)
        inv = 1.0 / s
        inv2 = inv * inv
        su, s2, s3 = 2.0 * mu2 * u, -2.0 * v2, -2.0 * v3
        grad[off] = -1.0 / a1 + 1.0 / a2 - su * inv
        grad[off + 1] = -s2 * inv
        grad[off + 2] = -s3 * inv
        hess[off, off] = su * su * inv2 - 2.0 * mu2 * inv + 1.0 / (a1 * a1) + 1.0 / (a2 * a2)
        hess[off + 1, off + 1] = s2 * s2 * inv2 + 2.0 * inv
        hess[off + 2, off + 2] = s3 * s3 * inv2 + 2.0 * inv
        h12, h13, h23 = su * s2 * inv2, su * s3 * inv2, s2 * s3 * inv2
        hess[off, off + 1] = h12
        hess[off + 1, off] = h12
        hess[off, off + 2] = h13
        hess[off + 2, off] = h13
        hess[off + 1, off + 2] = h23
        hess[off + 2, off + 1] = h23
    return value, grad, hess


def _barrier_value(blocks: _Blocks, z: np.ndarray, lo, hi, mu):
    """Barrier value only (None when infeasible); used by the line search."""
    zf = z.tolist()
    value = 0.0
    for kind, i, off, extra in blocks.entries:
        if kind == "fixed":
            continue
        if kind == "disc":
            v2, v3 = zf[off], zf[off + 1]
            s = extra * extra - v2 * v2 - v3 * v3
            if s <= 0.0:
                return None
            value -= math.log(s)
            continue
        u, v2, v3 = zf[off], zf[off + 1], zf[off + 2]
        a1 = u - lo[i]
        a2 = hi[i] - u
        s = mu[i] * mu[i] * u * u - v2 * v2 - v3 * v3
        if a1 <= 0.0 or a2 <= 0.0 or s <= 0.0:
            return None
        value -= math.log(a1) + math.log(a2) + math.log(s)
    return value


def _initial_point(blocks: _Blocks, lo, hi, mu, f_prev) -> np.ndarray:
    """Strictly interior start, warm-started from f_prev where possible."""
    z = np.zeros(blocks.dim)
    for kind, i, off, extra in blocks.entries:
        if kind == "fixed":
            continue
        if kind == "disc":
            v = f_prev[3 * i + 1:3 * i + 3].copy()
            norm = np.linalg.norm(v)
            limit = 0.8 * extra
            if norm > limit:
                v *= limit / norm
            z[off:off + 2] = v
            continue
        width = hi[i] - lo[i]
        u = float(np.clip(f_prev[3 * i], lo[i] + 0.1 * width, hi[i] - 0.1 * width))
        v = f_prev[3 * i + 1:3 * i + 3].copy()
        norm = np.linalg.norm(v)
        limit = 0.8 * mu[i] * u
        if norm > limit:
            v *= limit / norm if norm > 0.0 else 0.0
        z[off] = u
        z[off + 1:off + 3] = v
    return z


def solve(problem: ConeProblem, settings: SolverSettings | None = None) -> Solution:
    """Minimize the contact force objective over the friction cones.

    Returns status "optimal" with the objective certified within
    opt_tol * (1 + |objective|) of the true minimum via the barrier duality
    gap, "max_iters" with the best iterate if the Newton budget runs out, or
    "infeasible" if a bound pair has gamma_low > gamma_up (a defect upstream:
    adaptive bounds are supposed to clamp).  Deterministic for fixed inputs.
    """
    if settings is None:
        settings = SolverSettings()
    m = problem.m
    lo = np.array([b.gamma_low for b in problem.bounds])
    hi = np.array([b.gamma_up for b in problem.bounds])
    mu = np.array([b.mu_tilde for b in problem.bounds])

    if np.any(lo > hi + 1e-12):
        f = np.zeros(3 * m)
        f[::3] = np.minimum(lo, hi)
        return Solution(
            f=f, status="infeasible", iterations=0,
            objective_value=cone_program.objective(problem, f),
            max_cone_residual=cone_program.max_residual(problem, f),
        )

    blocks = _Blocks(lo, hi, mu)
    if blocks.dim == 0:
        x = blocks.expand(np.zeros(0))
        return Solution(
            f=x, status="optimal", iterations=0,
            objective_value=cone_program.objective(problem, x),
            max_cone_residual=cone_program.max_residual(problem, x),
        )

    a_mat = problem.stack_matrix()
    h_full = a_mat.T @ a_mat + (problem.beta1 + problem.beta2) * np.eye(3 * m)
    b_full = a_mat.T @ problem.g_tilde + problem.beta1 * problem.f_prev
    idx = blocks.var_coords
    h_red = h_full[np.ix_(idx, idx)]
    b_red = b_full[idx] - h_full[idx, :] @ blocks.x_fixed
    const_red = float(
        blocks.x_fixed @ (h_full @ blocks.x_fixed)
        - 2.0 * (b_full @ blocks.x_fixed)
        + problem.g_tilde @ problem.g_tilde
        + problem.beta1 * (problem.f_prev @ problem.f_prev)
    )

    def grad_obj(z):
        return 2.0 * (h_red @ z - b_red)

    def obj(z):
        return float(z @ (h_red @ z) - 2.0 * (b_red @ z) + const_red)

    z = _initial_point(blocks, lo, hi, mu, problem.f_prev)
    lo_l, hi_l, mu_l = lo.tolist(), hi.tolist(), mu.tolist()
    t = blocks.nu / max(1.0, abs(obj(z)))
    newton_steps = 0
    status = "optimal"

    while True:
        # Newton centering at the current path parameter.
        while newton_steps < settings.max_iters:
            terms = _barrier_terms(blocks, z, lo_l, hi_l, mu_l)
            assert terms is not None, "iterate left the interior"
            phi, grad_phi, hess_phi = terms
            g = t * grad_obj(z) + grad_phi
            h = 2.0 * t * h_red + hess_phi
            try:
                dz = -np.linalg.solve(h, g)
            except np.linalg.LinAlgError:
                dz = -np.linalg.lstsq(h, g, rcond=None)[0]
            decrement_sq = float(-g @ dz)
            if decrement_sq <= _CENTER_TOL:
                break
            f0 = t * obj(z) + phi
            slope = float(g @ dz)
            alpha = 1.0
            accepted = False
            while alpha > 1e-13:
                z_new = z + alpha * dz
                phi_new = _barrier_value(blocks, z_new, lo_l, hi_l, mu_l)
                if phi_new is not None and t * obj(z_new) + phi_new <= f0 + 0.25 * alpha * slope:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break  # numerical floor; current point is as centered as float allows
            z = z_new
            newton_steps += 1

        current_obj = obj(z)
        gap = blocks.nu / t
        if gap <= settings.opt_tol * (1.0 + abs(current_obj)):
            break
        if newton_steps >= settings.max_iters:
            status = "max_iters"
            break
        t *= _PATH_MULTIPLIER

    x = blocks.expand(z)
    return Solution(
        f=x,
        status=status,
        iterations=newton_steps,
        objective_value=cone_program.objective(problem, x),
        max_cone_residual=cone_program.max_residual(problem, x),
    )


def _candidate_grid(u_range, tf_range, an_range, grid: int, mu: float):
    """Feasible force candidates for one contact: all (u, tfrac, angle) combos."""
    u_vals = np.linspace(u_range[0], u_range[1], grid)
    tf_vals = np.linspace(tf_range[0], tf_range[1], grid)
    an_vals = an_range
    f1 = np.broadcast_to(u_vals[:, None, None], (grid, grid, grid))
    t_mag = tf_vals[None, :, None] * mu * u_vals[:, None, None]
    f2 = t_mag * np.cos(an_vals)[None, None, :]
    f3 = t_mag * np.sin(an_vals)[None, None, :]
    cand = np.stack(
        [np.broadcast_to(f1, f2.shape).ravel(), f2.ravel(), f3.ravel()], axis=1
    )
    params = (u_vals, tf_vals, an_vals)
    return cand, cand[:, 0] ** 2 + cand[:, 1] ** 2 + cand[:, 2] ** 2, params


def oracle_solve(problem: ConeProblem, grid: int = 40) -> Solution:
    """Brute-force reference minimizer for small instances (m <= 3).

    Independent of `solve`: no Newton steps, no barriers, only feasible grid
    candidates evaluated against the objective.  Cost grows exponentially in
    the number of contacts, hence the m <= 3 precondition.
    """
    m = problem.m
    if m > 3:
        raise ValueError(f"oracle_solve supports at most 3 contacts, got {m}")
    if grid < 4:
        raise ValueError("grid must be at least 4")
    lo = np.array([b.gamma_low for b in problem.bounds])
    hi = np.array([b.gamma_up for b in problem.bounds])
    mu = np.array([b.mu_tilde for b in problem.bounds])
    bases = [frame.basis for frame in problem.frames]
    c1 = 1.0 + problem.beta1 + problem.beta2

    forces = np.zeros((m, 3))
    forces[:, 0] = lo
    chosen = [(lo[i], 0.0, 0.0) for i in range(m)]

    u_ranges = [(lo[i], hi[i]) for i in range(m)]
    tf_ranges = [(0.0, 1.0)] * m
    an_ranges = [np.linspace(0.0, 2.0 * np.pi, grid, endpoint=False)] * m

    total_passes = 0
    for _round in range(3):
        grids = [
            _candidate_grid(u_ranges[i], tf_ranges[i], an_ranges[i], grid, mu[i])
            for i in range(m)
        ]
        picked = [-1] * m
        for _sweep in range(100):
            world_sum = sum(bases[i] @ forces[i] for i in range(m))
            changed = False
            for i in range(m):
                cand, cand_sq, _ = grids[i]
                residual = problem.g_tilde - (world_sum - bases[i] @ forces[i])
                w = bases[i].T @ residual + problem.beta1 * problem.f_prev[3 * i:3 * i + 3]
                scores = c1 * cand_sq - 2.0 * (cand @ w)
                best = int(np.argmin(scores))
                if best != picked[i]:
                    world_sum = world_sum - bases[i] @ forces[i] + bases[i] @ cand[best]
                    forces[i] = cand[best]
                    picked[i] = best
                    changed = True
            total_passes += 1
            if not changed:
                break
        # Shrink each contact's search window around its incumbent parameters.
        for i in range(m):
            _, _, (u_vals, tf_vals, an_vals) = grids[i]
            k = picked[i]
            iu, rem = divmod(k, grid * grid)
            itf, ian = divmod(rem, grid)
            chosen[i] = (u_vals[iu], tf_vals[itf], an_vals[ian])
            du = (u_ranges[i][1] - u_ranges[i][0]) / (grid - 1)
            dtf = (tf_ranges[i][1] - tf_ranges[i][0]) / (grid - 1)
            dan = an_vals[1] - an_vals[0] if len(an_vals) > 1 else 0.0
            u_ranges[i] = (
                max(lo[i], chosen[i][0] - 2.0 * du),
                min(hi[i], chosen[i][0] + 2.0 * du),
            )
            tf_ranges[i] = (
                max(0.0, chosen[i][1] - 2.0 * dtf),
                min(1.0, chosen[i][1] + 2.0 * dtf),
            )
            an_ranges[i] = np.linspace(
                chosen[i][2] - 2.0 * dan, chosen[i][2] + 2.0 * dan, grid
            )

    f = forces.ravel()
    return Solution(
        f=f,
        status="optimal",
        iterations=total_passes,
        objective_value=cone_program.objective(problem, f),
        max_cone_residual=cone_program.max_residual(problem, f),
    )
