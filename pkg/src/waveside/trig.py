"""Trigonometric kernels in the spectral variable.

All mode functions in this package are built from cos(x*sqrt(lam)) and
sin(x*sqrt(lam))/sqrt(lam).  Both extend analytically to lam <= 0 (cosh and
sinh branches), and the sinc-like kernel has a removable singularity at
lam = 0.  These helpers keep every caller on the same real-valued branch.
"""

import numpy as np

# Below this value of lam*x**2 the power series is used for sin/sqrt kernels
# to avoid 0/0 and cancellation near lam == 0.
_SERIES_CUT = 1e-6


def cos_sqrt(lam, x):
    """cos(x*sqrt(lam)) for real lam, as cosh(x*sqrt(-lam)) when lam < 0."""
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    z = lam * x * x
    rt = np.sqrt(np.abs(z))
    neg = z < 0.0
    out = np.cos(np.where(neg, 0.0, rt))
    if np.any(neg):
        out = np.where(neg, np.cosh(np.where(neg, rt, 0.0)), out)
    return out if out.ndim else float(out)


def sinc_sqrt(lam, x):
    """sin(x*sqrt(lam))/sqrt(lam); x at lam=0; sinh branch for lam < 0.

    The lam -> 0 limit is taken by a 3-term power series in lam*x**2.
    """
    lam = np.asarray(lam, dtype=float)
    x = np.asarray(x, dtype=float)
    z = lam * x * x
    rt = np.sqrt(np.abs(z))
    root = np.sqrt(np.abs(np.where(lam == 0.0, 1.0, lam)))
    neg = z < 0.0
    out = np.sin(np.where(neg, 0.0, rt)) / root
    if np.any(neg):
        out = np.where(neg, np.sinh(np.where(neg, rt, 0.0)) / root, out)
    series = x * (1.0 - z / 6.0 + z * z / 120.0)
    out = np.where(np.abs(z) < _SERIES_CUT, series, out)
    return out if out.ndim else float(out)
