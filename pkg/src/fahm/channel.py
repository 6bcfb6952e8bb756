"""Fluid-antenna channel generation over 1D and 2D port grids.

Implements the finite-scatterer geometric model (LoS plus isotropic
scattered paths) and its rich-scattering limit, a correlated Rayleigh
channel whose port correlations follow J0(2*pi*distance) on the
normalized grid. All positions are stored in carrier wavelengths, so
the wavelength never appears explicitly. A receive-side coupling matrix
can be applied as a plain left multiplication; deriving such matrices
from electromagnetic models is out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .linalg import bessel_j0, psd_sqrt_factor

__all__ = [
    "PortGrid",
    "PathAngles",
    "GeometricChannelParams",
    "steering_vector",
    "correlation_matrix",
    "rayleigh_factor",
    "sample_rayleigh_channel",
    "sample_geometric_channel",
    "apply_coupling",
    "load_coupling_matrix",
]


class PathAngles(NamedTuple):
    """Azimuth/elevation pair in radians."""

    theta: float
    phi: float


@dataclass(frozen=True)
class PortGrid:
    """Port topology with normalized positions in wavelengths.

    ``coords`` holds one (x, y) pair per port; a line grid has y = 0.
    2D ports are enumerated row-major with the first axis fastest:
    linear index t = t2 * n1 + t1 for 0-based (t1, t2).
    """

    topology: str  # "line" | "plane"
    counts: tuple[int, ...]
    aperture: tuple[float, ...]
    coords: np.ndarray = field(repr=False)

    @classmethod
    def line(cls, n_ports: int, aperture: float) -> "PortGrid":
        """Equally spaced line of ``n_ports`` over ``aperture`` wavelengths.

        ``n_ports`` = 1 is accepted as a degenerate single-port grid at
        the origin (the equal-spacing rule needs n_ports >= 2).
        """
        if n_ports < 1:
            raise ValueError("n_ports must be >= 1")
        if aperture <= 0:
            raise ValueError("aperture must be positive")
        if n_ports == 1:
            x = np.zeros(1)
        else:
            x = np.arange(n_ports) * (aperture / (n_ports - 1))
        coords = np.column_stack([x, np.zeros(n_ports)])
        return cls("line", (n_ports,), (float(aperture),), coords)

    @classmethod
    def plane(cls, n1: int, n2: int, w1: float, w2: float) -> "PortGrid":
        """n1 x n2 grid over a w1 x w2 wavelength aperture."""
        if n1 < 2 or n2 < 2:
            raise ValueError("plane grids need at least 2 ports per axis")
        if w1 <= 0 or w2 <= 0:
            raise ValueError("apertures must be positive")
        t1 = np.arange(n1 * n2) % n1
        t2 = np.arange(n1 * n2) // n1
        coords = np.column_stack([t1 * (w1 / (n1 - 1)), t2 * (w2 / (n2 - 1))])
        return cls("plane", (n1, n2), (float(w1), float(w2)), coords)

    @property
    def n_ports(self) -> int:
        return self.coords.shape[0]

    def port_index(self, t1: int, t2: int = 0) -> int:
        """Row-major linear index of 0-based grid coordinates."""
        if self.topology == "line":
            if t2 != 0 or not 0 <= t1 < self.counts[0]:
                raise ValueError("coordinate out of range")
            return t1
        n1, n2 = self.counts
        if not (0 <= t1 < n1 and 0 <= t2 < n2):
            raise ValueError("coordinate out of range")
        return t2 * n1 + t1

    def port_coordinates(self, t: int) -> tuple[int, int]:
        """Inverse of :meth:`port_index`."""
        if not 0 <= t < self.n_ports:
            raise ValueError("port index out of range")
        if self.topology == "line":
            return t, 0
        n1 = self.counts[0]
        return t % n1, t // n1


@dataclass(frozen=True)
class GeometricChannelParams:
    """Finite-scatterer model parameters.

    ``rice_k`` is the LoS-to-scattered power ratio in LINEAR scale
    (configuration files carry it in dB and convert before reaching
    here). The LoS phase is redrawn uniformly per column on every call.
    """

    rice_k: float
    num_paths: int
    los_angles: PathAngles = PathAngles(np.pi / 2, 0.0)

    def __post_init__(self):
        if not np.isfinite(self.rice_k) or self.rice_k < 0:
            raise ValueError("rice_k must be finite and >= 0")
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")


def steering_vector(grid: PortGrid, theta: float, phi: float) -> np.ndarray:
    """Array response exp(-j 2 pi d(t)) for one arrival direction.

    The per-port propagation difference d(t) is x_t sin(theta) cos(phi)
    for line grids plus y_t cos(theta) on planes; the reference port at
    the origin contributes exactly 1.
    """
    d = grid.coords[:, 0] * (np.sin(theta) * np.cos(phi)) + grid.coords[:, 1] * np.cos(theta)
    return np.exp(-2j * np.pi * d)


def correlation_matrix(grid: PortGrid, variance: float = 1.0) -> np.ndarray:
    """Port correlation matrix variance * J0(2 pi d_{t,v}).

    d_{t,v} is the Euclidean distance between normalized port positions,
    so line grids follow the classic Jakes profile and planes its 2D
    extension. Returns a real symmetric matrix with ``variance`` on the
    diagonal exactly.
    """
    if variance <= 0:
        raise ValueError("variance must be positive")
    diff = grid.coords[:, None, :] - grid.coords[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return variance * bessel_j0(2.0 * np.pi * dist)


def rayleigh_factor(grid: PortGrid, variance: float = 1.0) -> np.ndarray:
    """PSD square root of the grid correlation, precomputed for sampling.

    Dense grids make the correlation numerically rank-deficient, which
    the clipping eigen-factorization absorbs.
    """
    return psd_sqrt_factor(correlation_matrix(grid, variance))


def sample_rayleigh_channel(factor: np.ndarray, n_columns: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix with i.i.d. columns CN(0, factor @ factor^H).

    ``factor`` comes from :func:`rayleigh_factor`. Each column is
    factor @ g with g standard circular complex Gaussian.
    """
    n = factor.shape[0]
    g = (rng.standard_normal((n, n_columns)) + 1j * rng.standard_normal((n, n_columns))) / np.sqrt(2.0)
    return factor @ g


def sample_geometric_channel(
    grid: PortGrid,
    n_columns: int,
    params: GeometricChannelParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Finite-scatterer channel: one LoS ray plus ``num_paths`` scattered rays.

    Column m is

        sqrt(K/(K+1)) e^{j delta_m} a(theta_0, phi_0)
        + sqrt(1/(N_p (K+1))) sum_l kappa_l a(theta_l, phi_l)

    with kappa_l i.i.d. CN(0, 1), LoS phases delta_m uniform on
    [0, 2 pi), and scattered directions drawn fresh per column from the
    isotropic (sphere-uniform) distribution: phi uniform on [-pi, pi)
    and cos(theta) uniform on [-1, 1]. Per-entry average power is 1 for
    every K.
    """
    n = grid.n_ports
    k = params.rice_k
    n_paths = params.num_paths
    los = steering_vector(grid, params.los_angles.theta, params.los_angles.phi)

    deltas = rng.uniform(0.0, 2.0 * np.pi, size=n_columns)
    cos_theta = rng.uniform(-1.0, 1.0, size=(n_paths, n_columns))
    phis = rng.uniform(-np.pi, np.pi, size=(n_paths, n_columns))
    gains = (
        rng.standard_normal((n_paths, n_columns)) + 1j * rng.standard_normal((n_paths, n_columns))
    ) / np.sqrt(2.0)

    thetas = np.arccos(cos_theta)
    los_scale = np.sqrt(k / (k + 1.0))
    nlos_scale = np.sqrt(1.0 / (n_paths * (k + 1.0)))

    out = np.empty((n, n_columns), dtype=complex)
    for m in range(n_columns):
        # (n_paths, n) matrix of scattered steering rows for this column
        d = np.outer(np.sin(thetas[:, m]) * np.cos(phis[:, m]), grid.coords[:, 0]) + np.outer(
            np.cos(thetas[:, m]), grid.coords[:, 1]
        )
        scattered = np.exp(-2j * np.pi * d).T @ gains[:, m]
        out[:, m] = los_scale * np.exp(1j * deltas[m]) * los + nlos_scale * scattered
    return out


def apply_coupling(channel: np.ndarray, coupling_rx: np.ndarray) -> np.ndarray:
    """Left-multiply the channel by a receive coupling matrix."""
    channel = np.asarray(channel)
    coupling_rx = np.asarray(coupling_rx)
    if coupling_rx.ndim != 2 or coupling_rx.shape[0] != coupling_rx.shape[1]:
        raise ValueError("coupling matrix must be square")
    if coupling_rx.shape[1] != channel.shape[0]:
        raise ValueError(
            f"coupling is {coupling_rx.shape[0]}x{coupling_rx.shape[1]} "
            f"but the channel has {channel.shape[0]} ports"
        )
    return coupling_rx @ channel


def load_coupling_matrix(path) -> np.ndarray:
    """Read a coupling matrix from a plain-text file.

    Format: first line the port count N, then N rows of N complex
    entries written as "re,im" pairs separated by whitespace.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty coupling file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"{path}: first line must be the port count") from exc
    if len(lines) - 1 != n:
        raise ValueError(f"{path}: expected {n} matrix rows, found {len(lines) - 1}")
    out = np.empty((n, n), dtype=complex)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != n:
            raise ValueError(f"{path}: row {i + 1} has {len(tokens)} entries, expected {n}")
        for j, tok in enumerate(tokens):
            try:
                re_s, im_s = tok.split(",")
                out[i, j] = complex(float(re_s), float(im_s))
            except ValueError as exc:
                raise ValueError(f"{path}: row {i + 1} entry {j + 1}: cannot parse '{tok}'") from exc
    return out
