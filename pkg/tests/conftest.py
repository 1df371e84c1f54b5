import mpmath as mp
import numpy as np
import pytest


def mp_hermite_functions(K, x, dps=60):
    """Orthonormal Hermite functions by the polynomial recurrence in extended precision."""
    with mp.workdps(dps):
        x = mp.mpf(x)
        g = mp.exp(-x * x / 2)
        h0 = g / mp.pi ** mp.mpf("0.25")
        out = [h0]
        if K >= 1:
            out.append(mp.sqrt(2) * x * h0)
        for k in range(1, K):
            out.append(mp.sqrt(mp.mpf(2) / (k + 1)) * x * out[k] - mp.sqrt(mp.mpf(k) / (k + 1)) * out[k - 1])
        return out


def mp_laguerre_functions(alpha, K, x, dps=60):
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        x = mp.mpf(x)
        u = x * x
        L = [mp.mpf(1), 1 + a - u]
        for k in range(1, K):
            L.append(((2 * k + 1 + a - u) * L[k] - (k + a) * L[k - 1]) / (k + 1))
        pre = mp.exp(-u / 2) * x ** (a + mp.mpf(1) / 2)
        return [mp.sqrt(2 * mp.gamma(k + 1) / mp.gamma(k + a + 1)) * pre * L[k] for k in range(K + 1)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def mp_hermite_mehler_sum(t, x, y, K=200, dps=40):
    """Truncated eigen-sum of the Hermite heat kernel in extended precision.

    The terms reach O(1) while the kernel can be ~1e-17 off the diagonal, so
    the sum cancels far below double precision.
    """
    with mp.workdps(dps):
        hx = mp_hermite_functions(K, x, dps)
        hy = mp_hermite_functions(K, y, dps)
        t = mp.mpf(t)
        return float(mp.fsum(mp.exp(-t * (k + mp.mpf(1) / 2)) * hx[k] * hy[k] for k in range(K + 1)))


def mp_laguerre_mehler_sum(alpha, t, x, y, K=200, dps=40):
    with mp.workdps(dps):
        fx = mp_laguerre_functions(alpha, K, x, dps)
        fy = mp_laguerre_functions(alpha, K, y, dps)
        t = mp.mpf(t)
        return float(mp.fsum(mp.exp(-t * (2 * k + mp.mpf(alpha) + 1)) * fx[k] * fy[k] for k in range(K + 1)))
