"""Contact frames and the rotation-slip geometry of multi-contact grasps.

A contact frame is the orthonormal basis (n, d, c) at a contact point with n
the inward surface normal and d, c tangents satisfying n = d x c.  The slip
helpers quantify how much tangential displacement a rigid rotation about an
arbitrary axis induces at each contact; for non-collinear contacts that
displacement is strictly positive for every nonzero rotation, which is why
holding every contact inside its friction cone also pins down the object's
orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_ORTHO_TOL = 1e-12


def _as_vec3(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ContactFrame:
    """Orthonormal contact basis at `position`: inward normal n, tangents d, c."""

    position: np.ndarray
    n: np.ndarray
    d: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position, "position"))
        object.__setattr__(self, "n", _as_vec3(self.n, "n"))
        object.__setattr__(self, "d", _as_vec3(self.d, "d"))
        object.__setattr__(self, "c", _as_vec3(self.c, "c"))
        for name in ("n", "d", "c"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > _ORTHO_TOL:
                raise ValueError(f"{name} is not unit length")
        if abs(self.n @ self.d) > _ORTHO_TOL or abs(self.n @ self.c) > _ORTHO_TOL \
                or abs(self.d @ self.c) > _ORTHO_TOL:
            raise ValueError("frame axes are not mutually orthogonal")
        if np.max(np.abs(np.cross(self.d, self.c) - self.n)) > 1e-10:
            raise ValueError("frame is not right-handed (n != d x c)")

    @property
    def basis(self) -> np.ndarray:
        """3x3 matrix with columns [n d c]; maps local force components to world."""
        return np.column_stack((self.n, self.d, self.c))


@dataclass(frozen=True)
class RotationAxis:
    """A line in space: a point on the axis and a unit direction."""

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _as_vec3(self.point, "point"))
        direction = _as_vec3(self.direction, "direction")
        norm = np.linalg.norm(direction)
        if norm <= 1e-9:
            raise ValueError("axis direction has near-zero length")
        object.__setattr__(self, "direction", direction / norm)


def build_contact_frame(position, normal) -> ContactFrame:
    """Complete an inward surface normal into a deterministic contact frame.

    The first tangent d is the normalized projection onto the tangent plane of
    the world axis least aligned with n (ties broken in x, y, z order); c
    completes the right-handed triple via c = n x d.
    """
    position = _as_vec3(position, "position")
    normal = _as_vec3(normal, "normal")
    norm = np.linalg.norm(normal)
    if norm <= 1e-9:
        raise ValueError("normal has near-zero length; cannot build a contact frame")
    n = normal / norm
    e = np.eye(3)[int(np.argmin(np.abs(n)))]
    c = np.cross(n, e)
    c = c / np.linalg.norm(c)
    d = np.cross(c, n)
    return ContactFrame(position=position, n=n, d=d, c=c)


def local_to_world(frame: ContactFrame, f_local) -> np.ndarray:
    """Map local force components (f1 along n, f2 along d, f3 along c) to world."""
    f_local = _as_vec3(f_local, "f_local")
    return frame.basis @ f_local


def world_to_local(frame: ContactFrame, f_world) -> np.ndarray:
    """Inverse of :func:`local_to_world` (the basis is orthogonal)."""
    f_world = _as_vec3(f_world, "f_world")
    return frame.basis.T @ f_world


def rotate_points(points, axis: RotationAxis, theta: float) -> np.ndarray:
    """Rotate one or more points by angle theta about an arbitrary axis (Rodrigues)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    u = axis.direction
    w = pts - axis.point
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    rotated = (
        cos_t * w
        + sin_t * np.cross(np.broadcast_to(u, w.shape), w)
        + (1.0 - cos_t) * np.outer(w @ u, u)
    )
    out = rotated + axis.point
    return out[0] if np.asarray(points).ndim == 1 else out


def slip_displacement(point, axis: RotationAxis, theta: float) -> np.ndarray:
    """Displacement of a fixed hand-side contact point relative to the object
    surface when the object rotates by theta about the axis.

    The norm equals 2*|sin(theta/2)|*r with r the point's distance to the axis
    line, and the displacement has no component along the axis direction.
    """
    point = _as_vec3(point, "point")
    return rotate_points(point, axis, theta) - point


def point_axis_distance(point, axis: RotationAxis) -> float:
    """Distance from a point to the axis line."""
    point = _as_vec3(point, "point")
    w = point - axis.point
    return float(np.linalg.norm(w - (w @ axis.direction) * axis.direction))


def rotational_slip_bound(contacts, axis: RotationAxis, theta: float) -> float:
    """Largest per-contact tangential displacement induced by a rotation.

    Strictly positive for any theta not a multiple of 2*pi whenever the
    contacts are non-collinear (some contact then lies off every axis line),
    so preventing tangential slip at every contact forbids the rotation.
    """
    pts = np.atleast_2d(np.asarray(contacts, dtype=float))
    if pts.size == 0:
        raise ValueError("at least one contact point is required")
    displaced = rotate_points(pts, axis, theta) - pts
    return float(np.max(np.linalg.norm(displaced, axis=1)))


def is_collinear(contacts, tol: float = 1e-6) -> bool:
    """True iff all points lie within `tol` of their least-squares line."""
    pts = np.atleast_2d(np.asarray(contacts, dtype=float))
    if pts.shape[0] <= 2:
        return True
    centered = pts - pts.mean(axis=0)
    # Principal direction of the point cloud; residual = distance to that line.
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    along = centered @ vt[0]
    residuals = centered - np.outer(along, vt[0])
    return float(np.max(np.linalg.norm(residuals, axis=1))) <= tol


def corotation_violation(contact, normal_trajectory, theta_samples) -> float:
    """Residual of the degenerate 'co-rotating normal' configuration.

    Works in axis-aligned coordinates where the rotation axis is the x-axis.
    A deformable contact can absorb a rotation without tangential slip only if
    its (possibly rotating) surface normal keeps n_x = 0 and stays orthogonal
    to the rotated radial vector; this returns the largest combined violation
    of those two conditions over the sampled angles.  Diagnostic only: the
    controller never evaluates it.
    """
    contact = _as_vec3(contact, "contact")
    y, z = contact[1], contact[2]
    radius = float(np.hypot(y, z))
    if radius <= 1e-12:
        raise ValueError("contact lies on the rotation axis; violation undefined")
    worst = 0.0
    for theta in np.asarray(theta_samples, dtype=float):
        n = _as_vec3(normal_trajectory(theta), "normal_trajectory(theta)")
        y_t = y * np.cos(theta) - z * np.sin(theta)
        z_t = y * np.sin(theta) + z * np.cos(theta)
        violation = abs(n[0]) + abs(n[1] * y_t + n[2] * z_t) / radius
        worst = max(worst, float(violation))
    return worst
