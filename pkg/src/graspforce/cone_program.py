"""Assembly of the per-timestep contact force optimization problem.

Decision variable: stacked local contact forces f = (f_1, ..., f_m) with
f_i = (normal, tangent_d, tangent_c).  Each f_i must stay in a bounded
Coulomb friction cone

    gamma_low_i <= f_{i,1} <= gamma_up_i,   f_{i,2}^2 + f_{i,3}^2 <= (mu f_{i,1})^2

and the objective trades equilibrium against smoothness and force magnitude:

    || sum_i B_i f_i - g_tilde ||^2 + beta1 ||f - f_prev||^2 + beta2 ||f||^2

where B_i is contact i's local-to-world basis and g_tilde is the estimated
weight-balancing wrench (points opposite gravity, magnitude mass * g at rest,
so the equilibrium term vanishes exactly at static balance).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from graspforce.contact_geometry import ContactFrame

DEFAULT_BETA1 = 0.1
DEFAULT_BETA2 = 0.01
DEFAULT_GAMMA_UP = 2.5  # N, normal-force actuation limit of the hand


@dataclass(frozen=True)
class ConeBounds:
    """Per-contact friction cone bounds: normal force box and friction coefficient."""

    gamma_low: float
    gamma_up: float
    mu_tilde: float
    saturated: bool = False  # True when the adaptive lower bound hit gamma_up

    def __post_init__(self):
        if not (0.0 <= self.gamma_low <= self.gamma_up):
            raise ValueError(
                f"need 0 <= gamma_low <= gamma_up, got [{self.gamma_low}, {self.gamma_up}]"
            )
        if self.mu_tilde <= 0.0:
            raise ValueError(f"mu_tilde must be positive, got {self.mu_tilde}")


@dataclass(frozen=True)
class ConeProblem:
    """One fully assembled force-distribution instance (m contacts, 3m variables)."""

    frames: tuple[ContactFrame, ...]
    bounds: tuple[ConeBounds, ...]
    g_tilde: np.ndarray
    f_prev: np.ndarray
    beta1: float
    beta2: float

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "bounds", tuple(self.bounds))
        object.__setattr__(self, "g_tilde", np.asarray(self.g_tilde, dtype=float))
        object.__setattr__(self, "f_prev", np.asarray(self.f_prev, dtype=float))

    @property
    def m(self) -> int:
        return len(self.frames)

    @property
    def num_variables(self) -> int:
        return 3 * self.m

    def stack_matrix(self) -> np.ndarray:
        """3 x 3m matrix of local-to-world bases; world force sum = A @ f."""
        return np.hstack([frame.basis for frame in self.frames])


def adaptive_lower_bounds(measured_forces, mu_tilde: float, gamma_up: float = DEFAULT_GAMMA_UP):
    """Tactile-driven normal force floors: gamma_low = |tangential| / mu_tilde.

    The floor guarantees that the commanded normal force can support the
    tangential load currently observed at the contact.  Floors that would
    exceed gamma_up are clamped there and flagged as saturated so the caller
    can log that the contact is at its actuation limit.
    """
    if mu_tilde <= 0.0:
        raise ValueError(f"mu_tilde must be positive, got {mu_tilde}")
    bounds = []
    for f in measured_forces:
        f = np.asarray(f, dtype=float)
        tangential = float(np.hypot(f[1], f[2]))
        raw = tangential / mu_tilde
        saturated = raw > gamma_up
        bounds.append(
            ConeBounds(
                gamma_low=min(raw, gamma_up),
                gamma_up=gamma_up,
                mu_tilde=mu_tilde,
                saturated=saturated,
            )
        )
    return bounds


def assemble(frames, bounds, g_tilde, f_prev, beta1: float = DEFAULT_BETA1,
             beta2: float = DEFAULT_BETA2) -> ConeProblem:
    """Validate and bundle one optimization instance."""
    frames = tuple(frames)
    bounds = tuple(bounds)
    if len(frames) == 0:
        raise ValueError("at least one contact is required")
    if len(bounds) != len(frames):
        raise ValueError(f"{len(frames)} frames but {len(bounds)} bounds")
    g_tilde = np.asarray(g_tilde, dtype=float)
    if g_tilde.shape != (3,):
        raise ValueError(f"g_tilde must be a 3-vector, got shape {g_tilde.shape}")
    f_prev = np.asarray(f_prev, dtype=float)
    if f_prev.shape != (3 * len(frames),):
        raise ValueError(
            f"f_prev must have length {3 * len(frames)}, got shape {f_prev.shape}"
        )
    if beta1 < 0.0 or beta2 < 0.0:
        raise ValueError("beta1 and beta2 must be non-negative")
    return ConeProblem(frames=frames, bounds=bounds, g_tilde=g_tilde,
                       f_prev=f_prev, beta1=beta1, beta2=beta2)


def objective(problem: ConeProblem, f) -> float:
    """Equilibrium + smoothness + penalty objective at the stacked local force f."""
    f = np.asarray(f, dtype=float)
    if f.shape != (problem.num_variables,):
        raise ValueError(f"f must have length {problem.num_variables}")
    residual = problem.stack_matrix() @ f - problem.g_tilde
    e_eq = float(residual @ residual)
    diff = f - problem.f_prev
    e_smt = float(diff @ diff)
    e_pen = float(f @ f)
    return e_eq + problem.beta1 * e_smt + problem.beta2 * e_pen


@dataclass(frozen=True)
class ConeResiduals:
    """Per-contact constraint violations; all zero iff the force is admissible."""

    lower: float  # max(0, gamma_low - f1)
    upper: float  # max(0, f1 - gamma_up)
    cone: float   # max(0, |tangential| - mu * f1)

    @property
    def max(self) -> float:
        return max(self.lower, self.upper, self.cone)


def feasibility_residuals(problem: ConeProblem, f) -> list[ConeResiduals]:
    """Constraint violations of each contact's force block."""
    f = np.asarray(f, dtype=float)
    if f.shape != (problem.num_variables,):
        raise ValueError(f"f must have length {problem.num_variables}")
    out = []
    for i, b in enumerate(problem.bounds):
        fi = f[3 * i:3 * i + 3]
        tangential = float(np.hypot(fi[1], fi[2]))
        out.append(
            ConeResiduals(
                lower=max(0.0, b.gamma_low - fi[0]),
                upper=max(0.0, fi[0] - b.gamma_up),
                cone=max(0.0, tangential - b.mu_tilde * fi[0]),
            )
        )
    return out


def max_residual(problem: ConeProblem, f) -> float:
    """Largest constraint violation over all contacts."""
    return max(r.max for r in feasibility_residuals(problem, f))
