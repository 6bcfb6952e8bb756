"""Independent oracles shared by the test modules.

Everything here recomputes expected values from first principles
(series expansions, explicit re-inversion, power iteration, direct
enumeration) and must stay independent of the library code paths it is
used to check.
"""

import mpmath
import numpy as np


def j0_series_oracle(x):
    """High-precision truncated power series sum_k (-1)^k (x/2)^(2k) / (k!)^2.

    Working precision scales with |x| because the alternating terms grow
    to ~e^(2|x|) before cancelling.
    """
    dps = 60 + int(abs(x))
    with mpmath.workdps(dps):
        q = mpmath.mpf(x) ** 2 / 4
        term = mpmath.mpf(1)
        acc = mpmath.mpf(1)
        k = 0
        while abs(term) > mpmath.mpf(10) ** -40 or k < abs(x):
            k += 1
            term = term * (-q) / (k * k)
            acc += term
            if k > 10_000:
                break
        return float(acc)


def random_hermitian_pd(rng, n, ridge=1.0):
    """Random Hermitian positive-definite matrix G G^H + ridge * I."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    b = g @ g.conj().T + ridge * np.eye(n)
    return (b + b.conj().T) / 2.0


def explicit_inverse(b):
    """Plain numpy inversion, the reference for downdate checks."""
    return np.linalg.inv(b)


def explicit_drop_quadratic(h, b, position):
    """h^H B^{-1} h recomputed after explicitly deleting row/column `position`."""
    keep = np.arange(b.shape[0]) != position
    b_sub = b[np.ix_(keep, keep)]
    h_sub = h[keep]
    return float(np.real(h_sub.conj() @ np.linalg.solve(b_sub, h_sub)))


def gev_power_iteration_oracle(h, b, iterations=200):
    """Max of |w^H h|^2 / (w^H B w) via power iteration on B^{-1} h h^H."""
    c = np.linalg.solve(b, np.outer(h, h.conj()))
    rng = np.random.default_rng(0)
    w = rng.standard_normal(len(h)) + 1j * rng.standard_normal(len(h))
    w /= np.linalg.norm(w)
    for _ in range(iterations):
        w = c @ w
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        w /= nrm
    num = abs(w.conj() @ h) ** 2
    den = float(np.real(w.conj() @ (b @ w)))
    return float(num / den)


def random_link_problem(rng, n, users, snr=10.0):
    """Uncorrelated random desired/interference channel columns."""
    h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    interf = (
        rng.standard_normal((n, users - 1)) + 1j * rng.standard_normal((n, users - 1))
    ) / np.sqrt(2)
    return h, interf, snr


def interference_plus_noise(h_interf, snr, n):
    return h_interf @ h_interf.conj().T + np.eye(n) / snr
