"""Post-combining SINR, spectral efficiency and outage probability.

These are the quantities every receiver scheme is ultimately scored
with; the SINR evaluation is deliberately independent of the receiver
code paths so it can cross-check their reported values.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "combining_sinr",
    "spectral_efficiency",
    "outage_probability",
    "wilson_interval",
]


def combining_sinr(channel, user, snr, ports, analog, digital):
    """SINR of one user after port selection and hybrid combining.

    Evaluates

        |w^H F^H S^T H e_u|^2
        / ( sum_{j != u} |w^H F^H S^T H e_j|^2 + ||F w||^2 / snr )

    with the selection implemented as row extraction by ``ports``
    (0-based, into the N x M ``channel``) and the BS applying canonical
    precoders. Degree-0 homogeneous in F w, so any rescaling of the
    combiner leaves it unchanged. ``snr`` is linear.
    """
    channel = np.asarray(channel)
    ports = np.asarray(ports, dtype=int)
    analog = np.atleast_2d(np.asarray(analog, dtype=complex))
    digital = np.asarray(digital, dtype=complex).reshape(-1)
    if analog.shape[0] != len(ports):
        raise ValueError("analog combiner rows must match the selected port count")
    if analog.shape[1] != len(digital):
        raise ValueError("digital combiner length must match the analog column count")
    if not 0 <= user < channel.shape[1]:
        raise ValueError("user index out of range")
    if snr <= 0 or not np.isfinite(snr):
        raise ValueError("snr must be positive and finite")

    t_eq = analog @ digital
    rows = channel[ports, :]
    responses = t_eq.conj() @ rows  # length M: w^H F^H S^T H e_j for each j
    powers = np.abs(responses) ** 2
    signal = powers[user]
    interference = float(np.sum(powers)) - float(signal)
    noise = float(np.real(t_eq.conj() @ t_eq)) / snr
    return float(signal / (interference + noise))


def spectral_efficiency(sinr):
    """log2(1 + sinr) in bits/s/Hz; accepts scalars or arrays."""
    arr = np.asarray(sinr, dtype=float)
    if np.any(arr < 0):
        raise ValueError("sinr must be non-negative")
    out = np.log2(1.0 + arr)
    return float(out) if arr.ndim == 0 else out


def outage_probability(samples, threshold):
    """Fraction of SE samples strictly below ``threshold``.

    Boundary samples (exactly the threshold) count as non-outage.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("outage estimation needs at least one sample")
    return float(np.count_nonzero(arr < threshold)) / arr.size


def wilson_interval(count, total, z=1.959963984540054):
    """Wilson score interval for a binomial proportion (default 95%)."""
    if total <= 0:
        raise ValueError("total must be positive")
    if not 0 <= count <= total:
        raise ValueError("count must lie in [0, total]")
    p = count / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (p + z2 / (2.0 * total)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / total + z2 / (4.0 * total * total))
    return max(0.0, center - half), min(1.0, center + half)
