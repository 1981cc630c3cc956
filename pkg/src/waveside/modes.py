"""Reading one boundary trace: mode frequencies and amplitudes.

The measured channel is a finite sum A0*t + sum_k A_k sin(w_k t).  Poles of
its Laplace transform sit on the imaginary axis at +-i*w_k, which makes
direct numerical pole finding ill-conditioned; fitting the equivalent
sinusoid model to the samples reads the same data stably.  Detection is
greedy: pick the strongest FFT peak of the current residual, refit all
amplitudes linearly, refine every frequency by damped Gauss-Newton with an
analytic Jacobian, repeat until the residual stops improving.

``ModeDetector`` exposes this as a scikit-learn regressor (fit on times and
samples, predict resynthesizes), so traces can move through standard
pipelines; ``detect_modes`` is the trace-level functional wrapper that also
enforces the sampling contracts.
"""

import numpy as np
from dataclasses import dataclass
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .model import (
    ROBIN, SpectralData, ExtractionError, ValidationError,
    MEASUREMENT_CHANNELS, check_uniform_grid,
)
from .transmute import b_closed_form

#: minimum (frequency gap) * (duration) product, in units of 2*pi
GAP_PERIODS = 4.0


@dataclass(frozen=True)
class ModeEstimate:
    """One recovered mode.

    ``fit_residual`` is the relative L2 residual of the full model fit the
    mode belongs to (shared by all modes of one detection run).
    """

    omega: float
    amplitude: float
    is_linear_term: bool
    fit_residual: float


@dataclass(frozen=True)
class ResolvabilityReport:
    nyquist_margin: float
    gap_margin: float
    residual: float
    flags: tuple


def _model_matrix(t, omegas):
    cols = [t] + [np.sin(w * t) for w in omegas]
    return np.column_stack(cols)


def _linear_fit(t, u, omegas):
    A = _model_matrix(t, omegas)
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    coef, _, _, _ = np.linalg.lstsq(A / norms, u, rcond=None)
    coef = coef / norms
    r = u - A @ coef
    return coef[0], coef[1:], r


def _fft_peak(r, dt):
    """Strongest spectral peak of the residual, with parabolic refinement."""
    n = len(r)
    win = np.hanning(n)
    mag = np.abs(np.fft.rfft(r * win))
    mag[:2] = 0.0
    k = int(np.argmax(mag))
    if k == 0 or mag[k] == 0.0:
        return None
    if 1 <= k < len(mag) - 1 and mag[k - 1] > 0 and mag[k + 1] > 0:
        lm = np.log(mag[k - 1: k + 2])
        denom = lm[0] - 2 * lm[1] + lm[2]
        delta = 0.5 * (lm[0] - lm[2]) / denom if denom != 0 else 0.0
        delta = np.clip(delta, -0.5, 0.5)
    else:
        delta = 0.0
    return 2.0 * np.pi * (k + delta) / (n * dt)


def _refine(t, u, omegas, a0, amps):
    """Joint damped least-squares over (a0, amplitudes, frequencies)."""
    k = len(omegas)
    x0 = np.concatenate(([a0], amps, omegas))

    def resid(p):
        return _model_matrix(t, p[1 + k:]) @ np.concatenate(([p[0]], p[1: 1 + k])) - u

    def jac(p):
        a = p[1: 1 + k]
        w = p[1 + k:]
        J = np.empty((len(t), 2 * k + 1))
        J[:, 0] = t
        for i in range(k):
            J[:, 1 + i] = np.sin(w[i] * t)
            J[:, 1 + k + i] = a[i] * t * np.cos(w[i] * t)
        return J

    sol = least_squares(resid, x0, jac=jac, method="lm",
                        ftol=1e-15, xtol=1e-15, gtol=1e-15, max_nfev=400)
    p = sol.x
    a0, amps, omegas = p[0], p[1: 1 + k].copy(), p[1 + k:].copy()
    # canonical orientation: positive frequencies carry the sign in A
    flip = omegas < 0
    omegas = np.abs(omegas)
    amps = np.where(flip, -amps, amps)
    return a0, amps, omegas


class ModeDetector(BaseEstimator, RegressorMixin):
    """Sinusoid-plus-ramp regressor for boundary traces.

    Parameters
    ----------
    max_modes : cap on the number of oscillatory modes.
    order_tol : stop adding modes once the relative residual improvement
        falls below this.
    refine_every : run the joint nonlinear refinement after this many new
        modes (and always at the end).
    residual_tol : if set, raise ExtractionError when the final relative
        residual exceeds it.

    Fitted attributes: ``omega_``, ``amplitude_`` (sorted by frequency),
    ``linear_coef_``, ``has_linear_term_``, ``residual_``, ``modes_``.
    """

    def __init__(self, max_modes=40, order_tol=1e-2, refine_every=1,
                 residual_tol=None):
        self.max_modes = max_modes
        self.order_tol = order_tol
        self.refine_every = refine_every
        self.residual_tol = residual_tol

    def fit(self, X, y):
        t = np.asarray(X, dtype=float)
        if t.ndim == 2 and t.shape[1] == 1:
            t = t[:, 0]
        u = np.asarray(y, dtype=float)
        if t.shape != u.shape or t.ndim != 1:
            raise ValidationError("X and y must be matching 1d sample arrays")
        dt = check_uniform_grid(t, "time grid")
        scale = float(np.linalg.norm(u))
        if scale == 0.0:
            raise ValidationError("trace is identically zero")

        # a sinh mode (negative leading eigenvalue) multiplies the envelope
        # between the middle and the end of the record; a ramp only grows
        # linearly, so the raw-envelope ratio separates the two
        n = len(u)
        mid = np.sqrt(np.mean(u[int(0.45 * n): int(0.60 * n)] ** 2))
        tail = np.sqrt(np.mean(u[int(0.95 * n):] ** 2))
        if tail > 10.0 * max(mid, 1e-300):
            raise ExtractionError(
                "trace grows exponentially; leading eigenvalue below zero "
                "is not supported")
        a0, _, r = _linear_fit(t, u, [])

        omegas = []
        amps = np.array([])
        best = float(np.linalg.norm(r))
        merge_tol = 2.0 * np.pi / (t[-1] - t[0])
        while len(omegas) < self.max_modes:
            if best < 1e-12 * scale:
                break
            w_new = _fft_peak(r, dt)
            if w_new is None:
                break
            if omegas and np.min(np.abs(np.array(omegas) - w_new)) < 0.5 * merge_tol:
                break
            trial = omegas + [w_new]
            a0_t, amps_t, r_t = _linear_fit(t, u, trial)
            if len(trial) % self.refine_every == 0:
                a0_t, amps_t, w_ref = _refine(t, u, np.array(trial), a0_t, amps_t)
                trial = list(w_ref)
                r_t = u - _model_matrix(t, trial) @ np.concatenate(([a0_t], amps_t))
            new = float(np.linalg.norm(r_t))
            if best - new < self.order_tol * best:
                break
            omegas, amps, a0, r, best = trial, amps_t, a0_t, r_t, new

        if omegas:
            a0, amps, w = _refine(t, u, np.array(omegas), a0, amps)
            order = np.argsort(w)
            w, amps = w[order], amps[order]
            w, amps = self._merge_close(w, amps, merge_tol)
            w = self._prune(t, u, w)
            a0, amps, r = _linear_fit(t, u, list(w))
        else:
            w = np.array([])
            a0, amps, r = _linear_fit(t, u, [])

        resid_rel = float(np.linalg.norm(r)) / scale
        if self.residual_tol is not None and resid_rel > self.residual_tol:
            raise ExtractionError(
                "fit residual %.3g above threshold %.3g after max refinement"
                % (resid_rel, self.residual_tol))

        # the ramp counts as the zero mode only when it rises above the
        # residual floor, so noise never fabricates a lam=0 eigenvalue
        has_linear = abs(a0) * (t[-1] - t[0]) > 5.0 * float(
            np.sqrt(np.mean(r * r))) + 1e-13 * scale

        self.n_samples_ = len(t)
        self.dt_ = dt
        self.duration_ = float(t[-1] - t[0])
        self.omega_ = w
        self.amplitude_ = amps
        self.linear_coef_ = float(a0)
        self.has_linear_term_ = bool(has_linear)
        self.residual_ = resid_rel
        modes = []
        if has_linear:
            modes.append(ModeEstimate(omega=0.0, amplitude=float(a0),
                                      is_linear_term=True, fit_residual=resid_rel))
        for wi, ai in zip(w, amps):
            modes.append(ModeEstimate(omega=float(wi), amplitude=float(ai),
                                      is_linear_term=False, fit_residual=resid_rel))
        self.modes_ = modes
        return self

    @staticmethod
    def _prune(t, u, w):
        """Drop modes whose removal barely changes the residual.

        Spectral leakage of the ramp can masquerade as a weak low-frequency
        mode; a genuine mode carries energy far above the residual floor, so
        one significance sweep separates them.
        """
        w = list(w)
        while w:
            _, _, r = _linear_fit(t, u, w)
            base = np.linalg.norm(r)
            gains = []
            for i in range(len(w)):
                _, _, r_wo = _linear_fit(t, u, w[:i] + w[i + 1:])
                gains.append(np.linalg.norm(r_wo) - base)
            i = int(np.argmin(gains))
            if gains[i] < 0.3 * base:
                del w[i]
            else:
                break
        return np.array(w)

    @staticmethod
    def _merge_close(w, amps, merge_tol):
        if len(w) < 2:
            return w, amps
        out_w, out_a = [w[0]], [amps[0]]
        for wi, ai in zip(w[1:], amps[1:]):
            if wi - out_w[-1] < merge_tol:
                tot = out_a[-1] + ai
                out_w[-1] = (out_w[-1] * out_a[-1] + wi * ai) / tot if tot else wi
                out_a[-1] = tot
            else:
                out_w.append(wi)
                out_a.append(ai)
        return np.array(out_w), np.array(out_a)

    def predict(self, X):
        check_is_fitted(self, "omega_")
        t = np.asarray(X, dtype=float)
        if t.ndim == 2 and t.shape[1] == 1:
            t = t[:, 0]
        out = self.linear_coef_ * t
        for wi, ai in zip(self.omega_, self.amplitude_):
            out += ai * np.sin(wi * t)
        return out


def detect_modes(trace, max_modes, residual_tol=None):
    """Recover the mode content of one measured boundary trace.

    Enforces the trace-level contracts: the channel must be a measurement
    channel, sampling must stay below Nyquist for the fastest recovered
    mode, and the duration must separate neighbouring frequencies.
    """
    if trace.channel not in MEASUREMENT_CHANNELS:
        raise ValidationError(
            "channel %s not a measurement input" % trace.channel)
    det = ModeDetector(max_modes=max_modes, residual_tol=residual_tol)
    det.fit(trace.t, trace.samples)
    report = resolvability_report(trace, det.modes_)
    hard = [f for f in report.flags if f in ("nyquist", "gap")]
    if hard:
        raise ExtractionError("under-resolved trace: %s margin below 1 "
                              "(report: %s)" % ("/".join(hard), report))
    return det.modes_


def resolvability_report(trace, modes):
    """Sampling diagnostics for a detection result.

    nyquist_margin > 1 means the fastest mode is oversampled; gap_margin > 1
    means the duration covers the required number of beat periods of the
    closest mode pair.
    """
    omegas = np.array([m.omega for m in modes if not m.is_linear_term])
    flags = []
    if len(omegas):
        nyq = np.pi / (trace.dt * float(np.max(omegas)))
    else:
        nyq = np.inf
    if nyq < 1.0:
        flags.append("nyquist")
    if len(omegas) >= 2:
        gap = float(np.min(np.diff(np.sort(omegas))))
        gap_margin = trace.duration * gap / (GAP_PERIODS * 2.0 * np.pi)
    else:
        gap_margin = np.inf
    if gap_margin < 1.0:
        flags.append("gap")
    res = [m.fit_residual for m in modes]
    residual = float(res[0]) if res else 0.0
    if residual > 1e-6:
        flags.append("residual")
    return ResolvabilityReport(nyquist_margin=float(nyq),
                               gap_margin=float(gap_margin),
                               residual=residual, flags=tuple(flags))


def spectral_data_from_modes(modes, epsilon, variant=ROBIN):
    """Convert detected modes to spectral data via the known closed form.

    lam_n = omega_n^2 and alpha_n^2 = b(lam_n) / (A_n sqrt(lam_n)); the
    linear term gives alpha_0^2 = b(0) / A0.  Amplitudes must be strictly
    positive: a vanishing or negative amplitude signals a violated probing
    contract (the initial condition was not a valid g profile, or a spurious
    mode was fitted) and is an error, never clamped.
    """
    pairs = []
    for m in modes:
        if not np.isfinite(m.amplitude) or m.amplitude <= 1e-300:
            raise ExtractionError(
                "mode amplitude %.3g at omega %.6g not positive; probing "
                "contract violated or spurious mode" % (m.amplitude, m.omega))
        if m.is_linear_term:
            lam = 0.0
            alpha_sq = b_closed_form(0.0, epsilon, variant) / m.amplitude
        else:
            lam = m.omega ** 2
            alpha_sq = b_closed_form(lam, epsilon, variant) / (m.amplitude * m.omega)
        pairs.append((lam, alpha_sq))
    return SpectralData.from_pairs(pairs)
