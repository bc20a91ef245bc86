"""Turning response and macroscopic velocity law for run-and-tumble chemotaxis.

A cell population moving at speed ``c`` tumbles at rate
``phi0 * (1 + bias(v * dS))`` where ``dS`` is the chemoattractant gradient
and ``bias`` is an odd, non-increasing profile saturating at ``-lam`` /
``+lam``.  The resulting macroscopic drift velocity is
``velocity(s) = -c * bias(c * s)``, and ``velocity_potential`` is its exact
antiderivative vanishing at 0.  All three are available in closed form; the
potential is never obtained by runtime quadrature because the particle
right-hand side evaluates it in the innermost loop.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = ["VelocityMode", "ChemoModel"]


class VelocityMode(enum.Enum):
    """Shape of the drift-velocity law.

    SMOOTH   saturating odd quintic ramp over the gradient window [-alpha, alpha]
    STEP     hard switch lam*c*sign(s) (alpha = 0)
    IDENTITY velocity(s) = s, the plain aggregation-equation drift
    """

    SMOOTH = "smooth"
    STEP = "step"
    IDENTITY = "identity"


def _quintic_ramp(u: np.ndarray) -> np.ndarray:
    """Odd C1 quintic smoothstep: u*(15 - 10u^2 + 3u^4)/8 on [-1, 1].

    Satisfies ramp(+-1) = +-1, ramp'(+-1) = 0, ramp'(0) = 15/8.
    """
    return u * (15.0 + u * u * (-10.0 + 3.0 * u * u)) / 8.0


def _quintic_ramp_integral(u: np.ndarray) -> np.ndarray:
    """Antiderivative of the quintic ramp with value 0 at 0: (15u^2 - 5u^4 + u^6)/16."""
    u2 = u * u
    return u2 * (15.0 + u2 * (-5.0 + u2)) / 16.0


# integral of the ramp over [0, 1]
_RAMP_AREA = 11.0 / 16.0


@dataclass(frozen=True)
class ChemoModel:
    """Physical parameters of the chemotaxis model.

    Parameters
    ----------
    c : cell speed (> 0).
    phi0 : mean turning rate (> 0).
    lam : tumbling-bias amplitude, in (0, 1).
    alpha : gradient threshold beyond which the bias saturates (>= 0).
    mode : velocity law; STEP requires alpha == 0, SMOOTH requires alpha > 0.
    """

    c: float = 1.0
    phi0: float = 1.0
    lam: float = 0.8
    alpha: float = 0.1
    mode: VelocityMode = VelocityMode.SMOOTH

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")
        if self.c <= 0.0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if self.phi0 <= 0.0:
            raise ValueError(f"phi0 must be > 0, got {self.phi0}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.mode is VelocityMode.SMOOTH and self.alpha == 0.0:
            raise ValueError("SMOOTH mode requires alpha > 0")
        if self.mode is VelocityMode.STEP and self.alpha != 0.0:
            raise ValueError("STEP mode requires alpha == 0")

    # ------------------------------------------------------------------
    # turning bias
    # ------------------------------------------------------------------
    def bias(self, x):
        """Odd saturating tumbling bias, in [-lam, lam].

        Equals -lam*sign(x) for |x| >= alpha; SMOOTH mode interpolates with
        the odd quintic ramp inside [-alpha, alpha].  Oddness is bit-exact
        (evaluated through |x| and sign).  Not defined for IDENTITY mode.
        """
        if self.mode is VelocityMode.IDENTITY:
            raise ValueError("IDENTITY mode has no turning bias")
        x = np.asarray(x, dtype=float)
        if self.mode is VelocityMode.STEP:
            out = -self.lam * np.sign(x)
        else:
            u = np.minimum(np.abs(x) / self.alpha, 1.0)
            out = -self.lam * np.sign(x) * _quintic_ramp(u)
        return out if out.ndim else float(out)

    # ------------------------------------------------------------------
    # drift velocity and its antiderivative
    # ------------------------------------------------------------------
    def velocity(self, s):
        """Macroscopic drift velocity induced by a chemical gradient ``s``.

        Odd and non-decreasing; bounded by lam*c except in IDENTITY mode,
        where it is the identity map.
        """
        s = np.asarray(s, dtype=float)
        if self.mode is VelocityMode.IDENTITY:
            out = s.copy()
        elif self.mode is VelocityMode.STEP:
            out = self.lam * self.c * np.sign(s)
        else:
            u = np.minimum(np.abs(s) * (self.c / self.alpha), 1.0)
            out = self.lam * self.c * np.sign(s) * _quintic_ramp(u)
        return out if out.ndim else float(out)

    def velocity_potential(self, s):
        """Exact antiderivative of ``velocity`` with value 0 at 0.

        Even (bit-exact, evaluated through |s|) and convex.  Closed forms:
        STEP gives lam*c*|s|; IDENTITY gives s^2/2; SMOOTH is the polynomial
        integral of the quintic ramp inside the window and linear outside.
        """
        s = np.asarray(s, dtype=float)
        x = np.abs(s)
        if self.mode is VelocityMode.IDENTITY:
            out = 0.5 * x * x
        elif self.mode is VelocityMode.STEP:
            out = self.lam * self.c * x
        else:
            knee = self.alpha / self.c
            u = np.minimum(x / knee, 1.0)
            inner = self.lam * self.alpha * _quintic_ramp_integral(u)
            out = np.where(
                x >= knee,
                self.lam * self.c * (x - knee) + self.lam * self.alpha * _RAMP_AREA,
                inner,
            )
        return out if out.ndim else float(out)

    def sup_velocity_slope(self) -> float:
        """Upper bound on velocity'(s), used by the one-sided Lipschitz check.

        SMOOTH: c^2 * 15*lam/(8*alpha) (slope of the quintic ramp at 0);
        IDENTITY: 1.  STEP mode has an unbounded slope at the switch.
        """
        if self.mode is VelocityMode.IDENTITY:
            return 1.0
        if self.mode is VelocityMode.STEP:
            raise ValueError("STEP mode velocity slope is unbounded")
        return self.c * self.c * 15.0 * self.lam / (8.0 * self.alpha)

    def speed_bound(self, total_mass: float | None = None) -> float:
        """Largest drift speed the model can produce.

        For the saturating modes this is lam*c.  IDENTITY velocities are
        bounded by half the total mass carried by the density, so a mass
        must be supplied there.
        """
        if self.mode is VelocityMode.IDENTITY:
            if total_mass is None:
                raise ValueError("IDENTITY mode speed bound needs the total mass")
            return 0.5 * float(total_mass)
        return self.lam * self.c


def step_model(c: float = 1.0, phi0: float = 1.0, lam: float = 0.8) -> ChemoModel:
    """Convenience constructor for the hard-switch velocity law."""
    return ChemoModel(c=c, phi0=phi0, lam=lam, alpha=0.0, mode=VelocityMode.STEP)
