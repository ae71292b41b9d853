"""Spectral tools for uniformly sampled 2*pi-periodic data.

Samples are taken at ``s_j = 2*pi*j/N`` along axis 0.
"""

import numpy as np


def grid(N):
    return 2 * np.pi * np.arange(N) / N


def wavenumbers(N):
    k = np.fft.rfftfreq(N, d=1.0 / N)
    return k


def derivative(f, order=1):
    """Spectral derivative along axis 0 (Nyquist mode dropped for odd orders)."""
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    fh = np.fft.rfft(f, axis=0)
    k = wavenumbers(N)
    mult = (1j * k) ** order
    if order % 2 and N % 2 == 0:
        mult[-1] = 0
    fh = fh * mult.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(fh, n=N, axis=0)


def antiderivative(f):
    """Periodic primitive F with F(0) = 0 and the mean of f.

    F' = f - mean(f); the mean is returned so callers can judge periodicity.
    """
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    fh = np.fft.rfft(f, axis=0)
    mean = fh[0].real / N
    k = wavenumbers(N)
    mult = np.zeros_like(k, dtype=complex)
    mult[1:] = 1.0 / (1j * k[1:])
    if N % 2 == 0:
        mult[-1] = 0
    Fh = fh * mult.reshape((-1,) + (1,) * (f.ndim - 1))
    F = np.fft.irfft(Fh, n=N, axis=0)
    return F - F[0], mean


def trapezoid(f, axis=0):
    """Periodic trapezoid rule for the integral over one period."""
    f = np.asarray(f)
    return 2 * np.pi * f.mean(axis=axis)


def spectral_tail(f, fraction=0.25):
    """Relative energy in the top ``fraction`` of resolved modes.

    A crude sampled-smoothness indicator; analytic data gives roundoff.
    """
    f = np.asarray(f, dtype=float)
    fh = np.abs(np.fft.rfft(f, axis=0))
    cut = int(len(fh) * (1 - fraction))
    total = np.sqrt((fh ** 2).sum())
    if total == 0:
        return 0.0
    return float(np.sqrt((fh[cut:] ** 2).sum()) / total)


class TrigInterpolant:
    """Band-limited interpolant of periodic samples, evaluable anywhere."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        self.N = samples.shape[0]
        self.shape = samples.shape[1:]
        flat = samples.reshape(self.N, -1)
        fh = np.fft.rfft(flat, axis=0) / self.N
        k = wavenumbers(self.N)
        weight = np.full(len(k), 2.0)
        weight[0] = 1.0
        if self.N % 2 == 0:
            weight[-1] = 1.0
        self.k = k
        self.coef = fh * weight[:, None]
        self._nyq = self.N % 2 == 0

    def __call__(self, s, deriv=0):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        phase = np.exp(1j * np.outer(s, self.k))
        mult = (1j * self.k) ** deriv
        if self._nyq:
            # Nyquist mode interpolates as cos(N s / 2); its derivative is dropped
            if deriv % 2:
                mult[-1] = 0
        vals = (phase * mult) @ self.coef
        return vals.real.reshape(s.shape + self.shape)
