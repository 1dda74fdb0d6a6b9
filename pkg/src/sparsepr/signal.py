"""Fourier primitives on Z_N: DFT, power spectrum, autocorrelation, the
dihedral action, the second moment and the reduced quadratic measurement.

All transforms are unnormalized. Operators use dense matrices since N is small.
Indexing is 0-based and every index is taken mod N.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_positive_int, check_signal, check_signals
from .exceptions import ConfigError


@lru_cache(maxsize=128)
def _dft_matrix(n):
    k = np.arange(n)
    # reduce the exponent mod n before scaling so large products stay exact
    f = np.exp(2j * np.pi * (np.outer(k, k) % n) / n)
    f.flags.writeable = False
    return f


def dft_matrix(n):
    """Unnormalized DFT matrix with entries ``exp(2j*pi*j*k/n)``."""
    return _dft_matrix(check_positive_int(n, "n")).copy()


def real_dft_matrix(n):
    """Real Fourier matrix: cosine rows for ``0 <= l <= n//2``, sine rows above.

    Row ``l`` for ``l > n//2`` is ``sin(2*pi*l*k/n)``, so rows ``k`` and
    ``n - k`` span the same two-dimensional dihedral irreducible.
    """
    n = check_positive_int(n, "n")
    k = np.arange(n)
    phase = 2 * np.pi * (np.outer(k, k) % n) / n
    out = np.cos(phase)
    half = n // 2
    out[half + 1:] = np.sin(phase[half + 1:])
    return out


def reduced_length(n):
    return n // 2 + 1


def frequency_groups(n):
    """Group index ``min(k, n - k)`` of every Fourier coordinate ``k``."""
    k = np.arange(n)
    return np.minimum(k, (n - k) % n)


def grouping_matrix(n):
    """0/1 matrix summing Fourier coordinates into reduced-measurement slots."""
    g = np.zeros((reduced_length(n), n))
    g[frequency_groups(n), np.arange(n)] = 1.0
    return g


def dft(x):
    """DFT of a signal, or of each row of a 2-D batch."""
    x = check_signals(x)
    # numpy's inverse FFT uses the same +i sign; undo its 1/N
    return np.fft.ifft(x, axis=-1) * x.shape[-1]


def power_spectrum(x):
    """Componentwise squared modulus of the DFT (row-wise for a batch)."""
    return np.abs(dft(x)) ** 2


@lru_cache(maxsize=128)
def _lag_index(n):
    return (np.arange(n)[:, None] + np.arange(n)[None, :]) % n  # [l, n] -> n + l


def periodic_autocorrelation(x):
    """Cyclic autocorrelation ``a[l] = sum_n conj(x[n]) * x[n + l]``.

    For real ``x`` this coincides with ``sum_n x[n] x[n + l]``. The conjugate
    sits on the first factor so that ``dft(a) == power_spectrum(x)`` holds for
    complex input as well. A 2-D batch is handled row by row.
    """
    x = check_signals(x)
    a = (np.conj(x)[..., None, :] * x[..., _lag_index(x.shape[-1])]).sum(axis=-1)
    return a.real if not np.iscomplexobj(x) else a


@dataclass(frozen=True)
class DihedralElement:
    """The element ``r**rotation`` (``reflected=False``) or ``r**rotation s``.

    ``(r.x)[l] = x[l + 1]`` and ``(s.x)[l] = x[-l]``, so this element maps
    ``x`` to ``l -> x[l + rotation]`` or ``l -> x[-(l + rotation)]``.
    """

    rotation: int = 0
    reflected: bool = False

    def normalized(self, n):
        return DihedralElement(self.rotation % n, bool(self.reflected))

    def compose(self, other, n):
        """Return ``self * other`` (apply ``other`` first)."""
        sign = -1 if self.reflected else 1
        return DihedralElement((self.rotation + sign * other.rotation) % n,
                               self.reflected != other.reflected)

    def inverse(self, n):
        if self.reflected:
            return self.normalized(n)
        return DihedralElement((-self.rotation) % n, False)

    @staticmethod
    def all(n):
        """The 2n elements of the dihedral group of order 2n."""
        return [DihedralElement(k, f) for f in (False, True) for k in range(n)]


ROTATION = DihedralElement(1, False)
REFLECTION = DihedralElement(0, True)


def _dihedral_indices(g, n):
    ell = np.arange(n) + g.rotation
    return (-ell) % n if g.reflected else ell % n


def dihedral_act(g, x):
    x = check_signal(x)
    return x[_dihedral_indices(g, x.size)]


def second_moment(x):
    """Orbit sum of ``(g.x)(g.x)^*`` over the 2N dihedral elements, divided by N.

    The 1/N scaling (twice the plain group average) makes entry ``[a, b]``
    equal ``(2/N) * a_x[b - a]`` for real ``x``. Computed from the orbit
    directly rather than through the autocorrelation.
    """
    x = check_signal(x)
    n = x.size
    orbit = np.stack([x[_dihedral_indices(g, n)] for g in DihedralElement.all(n)])
    m = orbit.T @ np.conj(orbit) / n
    return m.real if not np.iscomplexobj(x) else m


def real_dft(x):
    """Real Fourier transform of a real signal (length N).

    Positions ``0..N//2`` hold ``sum_k x[k] cos(2 pi n k / N)``; position
    ``N - m`` (``1 <= m <= ceil(N/2) - 1``) holds ``sum_k x[k] sin(2 pi (N-m) k / N)``,
    which is minus the sine component of frequency ``m``.
    """
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        raise ConfigError("real_dft requires a real signal")
    x = check_signal(arr, "real")
    return real_dft_matrix(x.size) @ x


def real_dft_components(x):
    """``(cosine, sine)`` blocks of the real transform in frequency order."""
    z = real_dft(x)
    n = z.size
    half = n // 2
    sine = -z[::-1][: (n + 1) // 2 - 1] if n > 1 else z[:0]
    return z[: half + 1], sine


def reduced_b(z):
    """Grouped squared moduli ``(|z0|^2, |z1|^2 + |z[N-1]|^2, ...)``.

    Length ``N//2 + 1`` for either parity; for even N the last slot is the
    unpaired ``|z[N/2]|^2``.
    """
    z = check_signal(z, name="z")
    return grouping_matrix(z.size) @ (np.abs(z) ** 2)


def measurement(x, kind):
    """Dispatch for ``kind`` in ``{"power", "autocorr", "b"}``.

    ``b`` is taken in real-Fourier coordinates for real input and in DFT
    coordinates for complex input.
    """
    x = check_signal(x)
    if kind == "power":
        return power_spectrum(x)
    if kind == "autocorr":
        return periodic_autocorrelation(x)
    if kind == "b":
        z = dft(x) if np.iscomplexobj(x) else real_dft(x)
        return reduced_b(z)
    raise ConfigError(f"unknown measurement kind {kind!r}")
