"""Lowest eigenvalues of d^4/dy^4 + y^4 by a quadrature Galerkin method.

Hermite functions are evaluated by their three-term recurrence in 60-digit
arithmetic at Gauss-Hermite nodes, and the operator is assembled as the Gram
form <phi_i'', phi_j''> + <y^2 phi_i, y^2 phi_j> using
phi_m'' = (y^2 - 2m - 1) phi_m. No ladder operators are involved.

    python3 quartic_galerkin.py    # needs numpy, scipy, mpmath
"""
import mpmath as mp
import numpy as np
from scipy.linalg import eigh_tridiagonal

mp.mp.dps = 60


def hermite_values(x, n):
    """Orthonormal Hermite polynomials p_0..p_{n-1} at x (weight e^{-x^2})."""
    p = [mp.pi ** mp.mpf(-0.25), mp.sqrt(2) * x * mp.pi ** mp.mpf(-0.25)]
    for m in range(1, n - 1):
        p.append(mp.sqrt(mp.mpf(2) / (m + 1)) * x * p[m] - mp.sqrt(mp.mpf(m) / (m + 1)) * p[m - 1])
    return p[:n]


def lowest(size, count=5):
    q = size + 6
    guess, _ = eigh_tridiagonal(np.zeros(q), np.sqrt(np.arange(1, q) / 2.0))
    nodes = []
    for x0 in guess:
        x = mp.mpf(x0)
        for _ in range(8):
            p = hermite_values(x, q + 1)
            x -= p[q] / (mp.sqrt(2 * q) * p[q - 1])
        nodes.append(x)
    second, quartic = [], []
    for x in nodes:
        p = hermite_values(x, q)
        s = mp.sqrt(1 / mp.fsum(v * v for v in p))
        p = p[:size]
        quartic.append([float(p[m] * s * x * x) for m in range(size)])
        second.append([float(p[m] * s * (x * x - 2 * m - 1)) for m in range(size)])
    a, b = np.array(second), np.array(quartic)
    h = a.T @ a + b.T @ b
    return np.sort(np.linalg.eigvalsh(0.5 * (h + h.T)))[:count]


if __name__ == "__main__":
    for size in (200, 400):
        print(size, [repr(float(v)) for v in lowest(size)])
