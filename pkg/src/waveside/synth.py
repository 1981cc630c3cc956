"""Forward synthesis of boundary traces and the interior field.

With zero initial displacement and the probing initial velocity from
``transmute.build_g``, the solution is a pure sine series over the modes.
Since the eigenfunctions are normalized to y(0)=1 (robin) and phi'(0)=1
(dirichlet), both measured channels share one form:

    channel(t) = sum_n (b_n / alpha_n^2) * sin(t sqrt(lam_n)) / sqrt(lam_n)

with b_n the closed-form transform of the probing profile.  A zero
eigenvalue contributes its analytic limit, the linear-in-t term b_0 t /
alpha_0^2; a negative leading eigenvalue is synthesized with the sinh
branch and flagged, since the extraction stage rejects growing traces.
"""

import warnings
import numpy as np
from dataclasses import dataclass

from .model import (
    ROBIN, Trace, ValidationError,
    CHANNEL_UL, CHANNEL_FIELD, measurement_channel,
)
from .sturm import eigenvalues, solve_on_nodes
from .transmute import b_closed_form
from .trig import sinc_sqrt

#: dt is chosen so the fastest retained mode has at least this many samples
#: per period.
SAMPLES_PER_PERIOD = 16
#: default trace duration in units of the domain length
DURATION_LENGTHS = 40.0


@dataclass(frozen=True)
class ModalCoefficients:
    """Per-mode data (lam_n, alpha_n^2, b_n) driving the sine series."""

    variant: str
    lam: np.ndarray
    alpha_sq: np.ndarray
    b: np.ndarray

    @classmethod
    def from_scenario(cls, s, n_modes):
        """Modal data of a scenario probed with the canonical g profile."""
        res = eigenvalues(s, n_modes)
        lam = np.array([r.lam for r in res])
        alpha_sq = np.array([r.alpha_sq for r in res])
        return cls(variant=s.variant, lam=lam, alpha_sq=alpha_sq,
                   b=b_closed_form(lam, s.epsilon, s.variant))

    @classmethod
    def from_spectral_data(cls, data, epsilon, variant=ROBIN):
        return cls(variant=variant, lam=data.lam, alpha_sq=data.alpha_sq,
                   b=b_closed_form(data.lam, epsilon, variant))

    def __len__(self):
        return len(self.lam)

    def sine_amplitudes(self):
        """Amplitude of sin(t sqrt(lam_n)) in the measured channel; the zero
        mode reports the slope of its linear term instead."""
        zero = np.abs(self.lam) < 1e-9
        denom = self.alpha_sq * np.where(zero, 1.0, np.sqrt(np.abs(self.lam)))
        return self.b / denom, zero

    def tail_bound(self):
        """Crude bound on the dropped tail of the boundary series, from
        b = O(1/lam) decay extrapolated past the last retained amplitude."""
        if len(self.lam) < 2 or self.lam[-1] <= 0:
            return np.inf
        amp, _ = self.sine_amplitudes()
        return float(abs(amp[-1]) * len(self.lam) / 2.0)


def default_dt(modal):
    lam_max = float(np.max(np.abs(modal.lam)))
    return 2.0 * np.pi / (SAMPLES_PER_PERIOD * np.sqrt(max(lam_max, 1.0)))


def mode_sum(modal, t, shape=None):
    """Evaluate the modal sine series on arbitrary time samples.

    ``shape`` optionally weights each mode by its eigenfunction value at the
    observation point; the default (all ones) gives the boundary channel.
    """
    t = np.asarray(t, dtype=float)
    if float(np.min(modal.lam)) < -1e-9:
        warnings.warn("negative leading eigenvalue: trace contains a sinh "
                      "mode that extraction will reject", RuntimeWarning)
    weights = modal.b / modal.alpha_sq
    if shape is not None:
        weights = weights * shape
    out = np.zeros_like(t)
    for wgt, lam in zip(weights, modal.lam):
        out += wgt * sinc_sqrt(lam, t)
    return out


def synthesize_trace(s, n_modes, duration=None, dt=None):
    """Boundary measurement trace of the scenario probed with g.

    Robin scenarios yield the channel u(0, t); dirichlet ones u_x(0, t).
    Sampling defaults: dt from the fastest mode's period, duration 40
    domain lengths.
    """
    modal = ModalCoefficients.from_scenario(s, n_modes)
    if dt is None:
        dt = default_dt(modal)
    if duration is None:
        duration = DURATION_LENGTHS * s.length
    n = int(np.ceil(duration / dt)) + 1
    t = dt * np.arange(n)
    return Trace(channel=measurement_channel(s.variant), t0=0.0, dt=float(dt),
                 samples=mode_sum(modal, t))


def field_at(s, x, t, n_modes):
    """Partial-sum field u(x, t) at one location; the far-end oracle at x=ell.

    Returns a Trace on channel UL when x is the right endpoint, the
    measurement channel at x=0, and the non-measurement channel "field"
    elsewhere.  ``t`` must be uniformly spaced.
    """
    if not (0.0 <= x <= s.length * (1 + 1e-12)):
        raise ValidationError("x outside [0, ell]")
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    modal = ModalCoefficients.from_scenario(s, n_modes)
    _, Y, YP = solve_on_nodes(s, modal.lam)
    i = int(round(x / s.dx))
    shape = YP[i] if (s.variant != ROBIN and i == 0) else Y[i]
    out = mode_sum(modal, t, shape=shape)
    if abs(x - s.length) <= 0.5 * s.dx:
        channel = CHANNEL_UL
    elif i == 0:
        channel = measurement_channel(s.variant)
    else:
        channel = CHANNEL_FIELD
    return Trace(channel=channel, t0=float(t[0]), dt=dt, samples=out)


def laplace_of_trace(modal, s_point):
    """Laplace transform of the boundary series at one complex point.

    L(u)(s) = sum_n b_n / ((s^2 + lam_n) alpha_n^2), with poles at
    +-i sqrt(lam_n); the zero mode contributes b_0 / (s^2 alpha_0^2).
    """
    s_point = complex(s_point)
    lam = modal.lam
    poles = np.where(lam >= 0, 1j * np.sqrt(np.abs(lam)), -np.sqrt(np.abs(lam)) + 0j)
    if np.min(np.abs(s_point - poles)) < 1e-9 or np.min(np.abs(s_point + poles)) < 1e-9:
        raise ValidationError("s_point within 1e-9 of a series pole")
    return complex(np.sum(modal.b / modal.alpha_sq / (s_point * s_point + lam)))
