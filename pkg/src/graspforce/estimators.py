"""Online friction and weight estimation from tactile force measurements.

Both estimators consume the per-contact local forces reported by the tactile
layer.  The instantaneous friction observation is the tangential/normal ratio
averaged over load-bearing contacts; the instantaneous weight observation is
the world-frame sum of contact forces corrected by g / (g + a) so that
vertical hand acceleration does not bias the estimate.  Raw observations are
smoothed by sliding windows: a maximum filter for friction (optimistic, keeps
the largest recently seen ratio) and an average filter for the weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from graspforce.contact_geometry import ContactFrame

GRAVITY = 9.8  # N/kg

DEFAULT_MU_INIT = 0.4
DEFAULT_G_INIT_NORM = 0.196  # N, the weight of a 20 g object
DEFAULT_MU_WINDOW = 15
DEFAULT_G_WINDOW = 10
DEFAULT_MIN_NORMAL = 0.05  # N, contacts below this carry no friction signal


@dataclass(frozen=True)
class EstimatorState:
    """Sliding windows plus the current filtered estimates."""

    mu_window: np.ndarray  # (W_mu,)
    g_window: np.ndarray   # (W_g, 3)
    mu_tilde: float
    g_tilde: np.ndarray    # (3,)

    @classmethod
    def initial(cls, mu_init: float = DEFAULT_MU_INIT,
                g_init=None,
                mu_window: int = DEFAULT_MU_WINDOW,
                g_window: int = DEFAULT_G_WINDOW) -> "EstimatorState":
        """Windows pre-seeded with the conservative startup estimates."""
        if mu_window < 1 or g_window < 1:
            raise ValueError("window lengths must be at least 1")
        if g_init is None:
            g_init = np.array([0.0, 0.0, DEFAULT_G_INIT_NORM])
        g_init = np.asarray(g_init, dtype=float)
        return cls(
            mu_window=np.full(mu_window, float(mu_init)),
            g_window=np.tile(g_init, (g_window, 1)),
            mu_tilde=float(mu_init),
            g_tilde=g_init.copy(),
        )


def instantaneous_friction(measured, min_normal: float = DEFAULT_MIN_NORMAL):
    """Mean tangential/normal force ratio over load-bearing contacts.

    Contacts whose normal component is below `min_normal` are excluded (the
    ratio is numerically meaningless there).  Returns None when no contact
    qualifies, signalling the caller to keep the previous estimate.
    """
    ratios = []
    for f in measured:
        f = np.asarray(f, dtype=float)
        if f[0] >= min_normal:
            ratios.append(float(np.hypot(f[1], f[2]) / f[0]))
    if not ratios:
        return None
    return float(np.mean(ratios))


def instantaneous_gravity(measured, frames, a: float):
    """Weight observation from contact forces, corrected for vertical acceleration.

    `a` is the vertical acceleration of the hand (upward positive, m/s^2);
    the g / (g + a) factor removes the inertial component so the observation
    approximates the object's static weight.  Returns None near free fall
    (a <= -g) where the correction is singular.
    """
    if a <= -GRAVITY:
        return None
    total = np.zeros(3)
    for f, frame in zip(measured, frames, strict=True):
        if not isinstance(frame, ContactFrame):
            raise TypeError("frames must be ContactFrame instances")
        total += frame.basis @ np.asarray(f, dtype=float)
    return (GRAVITY / (GRAVITY + a)) * total


def filter_update(state: EstimatorState, mu_hat, g_hat) -> EstimatorState:
    """Push observations into the sliding windows and refresh the estimates.

    Passing None for either observation leaves that window untouched (the
    no-update signal from the instantaneous estimators).
    """
    mu_window = state.mu_window
    g_window = state.g_window
    if mu_hat is not None:
        mu_window = np.append(mu_window[1:], float(mu_hat))
    if g_hat is not None:
        g_window = np.vstack([g_window[1:], np.asarray(g_hat, dtype=float)])
    return replace(
        state,
        mu_window=mu_window,
        g_window=g_window,
        mu_tilde=float(np.max(mu_window)),
        g_tilde=g_window.mean(axis=0),
    )
