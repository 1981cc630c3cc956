"""Far-end determination from eigenvalues alone.

The boundary function Phi(lam) = y'(ell, lam) + H y(ell, lam) is entire of
order 1/2, so it is determined by its zeros, the eigenvalues:

    Phi(lam) = ell (lam_0 - lam) prod_{n>=1} (ell^2 / (pi n)^2) (lam_n - lam)

(robin; the dirichlet analogue has (n+1/2) in place of n and no separate
leading factor).  With the Wronskian identity alpha_n^2 = -y(ell, lam_n)
Phi'(lam_n) and y(ell, lam_n)/alpha_n^2 = -1/Phi'(lam_n), the far-end
profile follows from the modal series without knowing q beyond epsilon:

    u(ell, t) = 2 sum_n (sin(z_n) - z_n) / lam_n^2 sin(t sqrt(lam_n)) / Phi'(lam_n)

with z_n = epsilon sqrt(lam_n) (equivalently sum_n b_n sinc(lam_n, t) *
(-1/Phi'(lam_n)), which is the form implemented; it handles lam_0 = 0 by
the linear-in-t limit).  The division by Phi' is fixed by the identity
above and validated against the forward field: multiplying instead would be
off by alpha_n^4 / y^2.

Only the first N eigenvalues are known, so factors beyond N use the free
spacing shifted by the mean excess of the last known modes over the free
values; the pure free tail converges too slowly (its error is O(shift/N))
while the shifted tail is exact for constant-shift spectra.
"""

import numpy as np
from dataclasses import dataclass
from scipy.special import zeta

from .model import ROBIN, Trace, SpectralData, ValidationError, CHANNEL_UL
from .transmute import b_closed_form
from .trig import sinc_sqrt


@dataclass(frozen=True)
class BoundaryFunction:
    """Truncated Hadamard product over known eigenvalues plus a tail model."""

    lam: np.ndarray
    ell: float
    variant: str
    tail_shift: float

    @classmethod
    def from_eigenvalues(cls, lam, ell, variant=ROBIN, tail_shift=None,
                         shift_window=10):
        lam = np.asarray(lam, dtype=float)
        if len(lam) < 10:
            raise ValidationError("need at least 10 eigenvalues")
        if np.any(np.diff(lam) <= 0):
            raise ValidationError("eigenvalues must be strictly increasing")
        if tail_shift is None:
            n = np.arange(len(lam), dtype=float)
            off = 0.0 if variant == ROBIN else 0.5
            free = ((n + off) * np.pi / ell) ** 2
            k = min(shift_window, len(lam) // 3)
            tail_shift = float(np.mean((lam - free)[-k:]))
        return cls(lam=lam, ell=float(ell), variant=variant,
                   tail_shift=float(tail_shift))

    def __len__(self):
        return len(self.lam)


def _factor_scales(bf):
    """Per-factor normalizers ell^2/(pi (n+off))^2 and the leading weight."""
    n = np.arange(len(bf.lam), dtype=float)
    if bf.variant == ROBIN:
        c = np.empty(len(bf.lam))
        c[0] = bf.ell
        c[1:] = bf.ell ** 2 / (np.pi * n[1:]) ** 2
    else:
        c = bf.ell ** 2 / (np.pi * (n + 0.5)) ** 2
    return c


def _log_tail(bf, lam):
    """log of prod_{n>=N} (1 - (lam - shift) ell^2 / (pi (n+off))^2).

    Evaluated as a finite product up to M plus a two-term remainder from the
    Hurwitz zeta tail sums; all factors stay positive for lam below the
    first tail zero, which the truncation size M guarantees for the
    eigenvalue range of interest.
    """
    z = (lam - bf.tail_shift) * (bf.ell / np.pi) ** 2
    N = len(bf.lam)
    off = 0.0 if bf.variant == ROBIN else 0.5
    M = int(max(4 * N, 512, np.ceil(8.0 * np.sqrt(max(np.max(np.atleast_1d(np.abs(z))), 1.0)))))
    n = np.arange(N, M, dtype=float) + off
    terms = 1.0 - np.atleast_1d(z)[:, None] / (n * n)[None, :]
    if np.any(terms <= 0.0):
        raise ValidationError("lam beyond the resolved eigenvalue range")
    logs = np.sum(np.log(terms), axis=1)
    a = M + off
    logs += -np.atleast_1d(z) * zeta(2, a) - 0.5 * np.atleast_1d(z) ** 2 * zeta(4, a)
    return logs


def phi(bf, lam):
    """Boundary function from its zeros, tail-corrected.

    Exact zero at every supplied eigenvalue; between them the truncated
    product tracks y'(ell, .) + H y(ell, .) of the underlying problem.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    c = _factor_scales(bf)
    diff = bf.lam[None, :] - lam[:, None]
    sign = np.prod(np.where(diff < 0, -1.0, 1.0), axis=1)
    sign[np.any(diff == 0.0, axis=1)] = 0.0
    with np.errstate(divide="ignore"):
        logmag = np.sum(np.log(np.abs(diff) * c[None, :]), axis=1)
    out = sign * np.exp(logmag + _log_tail(bf, lam))
    out[sign == 0.0] = 0.0
    return out if len(out) > 1 else float(out[0])


def phi_prime(bf, m):
    """Derivative of the product at its m-th zero.

    Computed as (-c_m) times the product of all other factors there, never
    by numerical differentiation, which would cancel at the zero.
    """
    if not 0 <= m < len(bf.lam):
        raise ValidationError("mode index out of range")
    c = _factor_scales(bf)
    lam_m = bf.lam[m]
    diff = np.delete(bf.lam - lam_m, m)
    c_rest = np.delete(c, m)
    sign = -1.0 * np.prod(np.where(diff < 0, -1.0, 1.0))
    logmag = np.log(c[m]) + np.sum(np.log(np.abs(diff) * c_rest))
    return float(sign * np.exp(logmag + _log_tail(bf, np.array([lam_m]))[0]))


def far_end_profile(data, epsilon, ell_hat, t, variant=ROBIN, tail_shift=None):
    """Trace of u at the far end, from eigenvalues and epsilon alone.

    ``data`` may be a SpectralData or a plain eigenvalue array: the norming
    constants are not needed, the Wronskian identity replaces y(ell)/alpha^2
    by -1/Phi'(lam_n).  No sample of q beyond epsilon enters.
    """
    lam = data.lam if isinstance(data, SpectralData) else np.asarray(data, float)
    bf = BoundaryFunction.from_eigenvalues(lam, ell_hat, variant, tail_shift)
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    b = b_closed_form(lam, epsilon, variant)
    out = np.zeros_like(t)
    for n in range(len(lam)):
        out -= b[n] / phi_prime(bf, n) * sinc_sqrt(lam[n], t)
    return Trace(channel=CHANNEL_UL, t0=float(t[0]), dt=dt, samples=out)
