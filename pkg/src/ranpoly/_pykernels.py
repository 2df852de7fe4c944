"""numpy implementations of the log-modulus kernels (fallback backend)."""
import numpy as np

from ._special import wrap_signed

NAME = "python"

_CHUNK_PAIRS = 1 << 21


def _rows(n_psi, n):
    return max(1, _CHUNK_PAIRS // max(n, 1))


def grid_log_modulus(psi, theta, mults):
    psi = np.ascontiguousarray(psi, dtype=float)
    theta = np.ascontiguousarray(theta, dtype=float)
    mults = np.ascontiguousarray(mults, dtype=float)
    unit = bool(np.all(mults == 1.0))
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(psi), np.sin(psi)
    out = np.empty(psi.shape[0])
    step = _rows(psi.shape[0], theta.shape[0])
    with np.errstate(divide="ignore"):
        for lo in range(0, psi.shape[0], step):
            sl = slice(lo, lo + step)
            d2 = (cp[sl, None] - ct) ** 2 + (sp[sl, None] - st) ** 2
            logs = np.log(d2)
            out[sl] = logs.sum(axis=1) if unit else logs @ mults
    return out


def point_log_modulus(psi, theta, mults):
    psi = np.ascontiguousarray(psi, dtype=float)
    theta = np.ascontiguousarray(theta, dtype=float)
    mults = np.ascontiguousarray(mults, dtype=float)
    out = np.empty(psi.shape[0])
    step = _rows(psi.shape[0], theta.shape[0])
    with np.errstate(divide="ignore"):
        for lo in range(0, psi.shape[0], step):
            sl = slice(lo, lo + step)
            terms = 2.0 * np.log(np.abs(2.0 * np.sin(0.5 * wrap_signed(psi[sl, None] - theta))))
            out[sl] = terms @ mults
    return out
