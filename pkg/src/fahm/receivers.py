"""Receiver schemes for multiport fluid-antenna reception under slow FAMA.

Implements the single-port slow-FAMA baseline, select-then-combine
digital combining (DC), the CUMA structured analog aggregator, and the
hybrid multiport receiver built on generalized-eigenvector port
selection (GEPort) with backward elimination. The elimination loop has
two interchangeable engines: a rank-1 accelerated path that scores all
candidate removals in O(n) and downdates a tracked inverse in O(n^2),
and a deliberately naive reference that re-solves every candidate from
scratch. Both must select identical ports.

Everything is open loop: each user solves its own problem from its own
channel matrix, so per-user solves are independent and side-effect
free.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve

from .linalg import HermitianInverseState, hermitian_inverse, invert_pd

__all__ = [
    "UserLinkProblem",
    "CombinerSolution",
    "EliminationTrace",
    "SelectionResult",
    "interference_plus_noise_matrix",
    "interference_plus_noise_inverse",
    "dominant_gev",
    "effective_ports",
    "stopping_dimension",
    "geport_select",
    "hybrid_decompose",
    "fahm_geport_receiver",
    "per_port_sinr",
    "slow_fama_receiver",
    "dc_receiver",
    "cuma_receiver",
]

_TIE_REL_TOL = 1e-12


@dataclass(frozen=True)
class UserLinkProblem:
    """One user's link: desired channel column, interferer columns, SNR.

    With canonical precoding at the BS, the desired channel is the
    user's own column of its N x M matrix and the interference columns
    are all the others. ``snr`` is linear.
    """

    desired: np.ndarray
    interference: np.ndarray
    snr: float

    def __post_init__(self):
        d = np.asarray(self.desired, dtype=complex).reshape(-1)
        i = np.asarray(self.interference, dtype=complex)
        if i.ndim != 2 or i.shape[0] != d.shape[0]:
            raise ValueError("interference must be (n_ports, n_users - 1)")
        if not np.isfinite(self.snr) or self.snr <= 0:
            raise ValueError("snr must be finite and positive")
        object.__setattr__(self, "desired", d)
        object.__setattr__(self, "interference", i)

    @classmethod
    def from_channel(cls, channel: np.ndarray, user: int, snr: float) -> "UserLinkProblem":
        channel = np.asarray(channel, dtype=complex)
        if not 0 <= user < channel.shape[1]:
            raise ValueError("user index out of range")
        others = [j for j in range(channel.shape[1]) if j != user]
        return cls(channel[:, user], channel[:, others], snr)

    @property
    def n_ports(self) -> int:
        return self.desired.shape[0]

    @property
    def n_users(self) -> int:
        return self.interference.shape[1] + 1


@dataclass(frozen=True)
class CombinerSolution:
    """Selected ports plus the analog/digital combiner pair that serves them.

    ``combiner`` is the equivalent P-vector the hybrid pair realizes (up
    to a positive scale), ``analog``/``digital`` its F and w factors.
    CUMA solutions carry ``unit_modulus_analog=False`` because its
    analog taps have modulus <= 1 by construction, and ``fallback=True``
    marks the degenerate slow-FAMA substitution.
    """

    ports: np.ndarray
    combiner: np.ndarray
    analog: np.ndarray
    digital: np.ndarray
    sinr: float
    effective_ports: Optional[float] = None
    unit_modulus_analog: bool = True
    fallback: bool = False


@dataclass(frozen=True)
class EliminationTrace:
    """Removal order and the dominant-eigenvalue sequence it produced.

    ``sinr_sequence[k]`` is the achievable SINR with k ports removed;
    the sequence is non-increasing.
    """

    removed_ports: list[int] = field(default_factory=list)
    sinr_sequence: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass(frozen=True)
class SelectionResult:
    ports: np.ndarray
    combiner: np.ndarray
    sinr: float
    trace: EliminationTrace


# ---------------------------------------------------------------------------
# Generalized-eigenvector machinery
# ---------------------------------------------------------------------------


def interference_plus_noise_matrix(problem: UserLinkProblem) -> np.ndarray:
    """Sum of interferer outer products plus I/snr (Hermitian PD)."""
    n = problem.n_ports
    b = problem.interference @ problem.interference.conj().T + np.eye(n) / problem.snr
    return (b + b.conj().T) / 2.0


def interference_plus_noise_inverse(problem: UserLinkProblem) -> HermitianInverseState:
    """Tracked inverse of the interference-plus-noise matrix."""
    return hermitian_inverse(interference_plus_noise_matrix(problem))


def dominant_gev(h: np.ndarray, state: HermitianInverseState):
    """Dominant generalized eigenvector of (h h^H, B) on the active set.

    Because the signal matrix is rank 1, the eigenvector is simply
    v = B^{-1} h and its eigenvalue lam = Re(h^H v), the maximal
    generalized Rayleigh quotient (i.e. the achievable SINR) on the
    active indices. ``h`` is indexed by ORIGINAL port indices.
    """
    h = np.asarray(h, dtype=complex).reshape(-1)
    h_act = h[state.active]
    v = state.inverse @ h_act
    lam = float(np.real(h_act.conj() @ v))
    return v, lam


def effective_ports(v) -> float:
    """Inverse participation ratio of the combiner energy across ports.

    Computed scale-free as (sum |v_i|^2)^2 / sum |v_i|^4, identical to
    normalizing v to unit norm first; lies in [1, n] and is invariant
    under global scaling and phase rotation. Near 1 the combining gain
    sits on a single port; near n it is spread across the aperture.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    p2 = v.real * v.real + v.imag * v.imag
    s2 = float(np.sum(p2))
    if s2 == 0.0:
        raise ValueError("effective_ports is undefined for the zero vector")
    s4 = float(np.sum(p2 * p2))
    return s2 * s2 / s4


def stopping_dimension(p_eff: float, n_ports: int) -> int:
    """Selected-port dimension: ceiling of the effective-port count, clamped."""
    return int(min(max(math.ceil(p_eff), 1), n_ports))






def geport_select(
    problem: UserLinkProblem,
    target_ports: int,
    mode: str = "fast",
    initial_state: Optional[HermitianInverseState] = None,
) -> SelectionResult:
    """Backward port elimination guided by the dominant generalized eigenvector.

    Starting from all ports, each iteration computes the dominant GEV
    v = B^{-1} h of the surviving set and discards the least relevant
    port, the one carrying the smallest combiner energy |v_i|^2 (ties
    within 1e-12 relative go to the lowest original index), until
    ``target_ports`` remain. The recorded SINR sequence uses the exact
    one-drop identity, so the trace is non-increasing by construction.

    ``mode="fast"`` maintains the inverse across iterations through
    O(n^2) rank-1 downdates; ``mode="naive"`` is the reference engine
    that re-inverts the reduced matrix from scratch every iteration
    (O(n^3) per iteration). Both must select identical port sets.

    Returns the surviving ports (ascending), the equivalent combiner on
    them, the final eigenvalue, and the full elimination trace.
    """
    n = problem.n_ports
    if not 1 <= target_ports <= n:
        raise ValueError(f"target_ports must lie in [1, {n}], got {target_ports}")
    if mode == "fast":
        return _geport_fast(problem, target_ports, initial_state)
    if mode == "naive":
        return _geport_naive(problem, target_ports)
    raise ValueError(f"unknown mode '{mode}'")


def _pick_least_energy(energy: np.ndarray, original: np.ndarray) -> int:
    # Least combiner energy leaves; energies tied within 1e-12 relative
    # resolve to the lowest original port index.
    emin = float(np.min(energy))
    eligible = np.nonzero(energy <= emin * (1.0 + _TIE_REL_TOL))[0]
    return int(eligible[np.argmin(original[eligible])])


def _geport_fast(problem, target_ports, initial_state):
    # In-place variant of the tracked-inverse downdate: the dropped port is
    # swapped to the end of a working buffer and the leading block receives
    # the rank-1 correction, so no per-iteration reallocation happens.
    n = problem.n_ports
    if initial_state is not None:
        m = initial_state.inverse.copy()
    else:
        m = interference_plus_noise_inverse(problem).inverse.copy()
    h = problem.desired.copy()
    order = np.arange(n)  # order[i] = original port held in buffer slot i
    k = n
    v = m @ h
    lam = float(np.real(h.conj() @ v))
    removed: list[int] = []
    sequence = [lam]
    while k > target_ports:
        diag = m.diagonal()[:k].real
        if np.any(diag <= 0.0):
            raise LinAlgError("inverse diagonal lost positivity (numerical degeneracy)")
        vk = v[:k]
        energy = vk.real * vk.real + vk.imag * vk.imag
        pos = _pick_least_energy(energy, order[:k])
        # exact one-drop identity for the chosen port keeps the trace monotone
        lam = lam - float(energy[pos]) / float(diag[pos])
        last = k - 1
        if pos != last:
            m[[pos, last], :k] = m[[last, pos], :k]
            m[:k, [pos, last]] = m[:k, [last, pos]]
            h[[pos, last]] = h[[last, pos]]
            order[[pos, last]] = order[[last, pos]]
        m_ii = float(m[last, last].real)
        col = m[:last, last]
        m[:last, :last] -= np.outer(col, col.conj()) / m_ii
        k = last
        if (n - k) % 8 == 0:
            # rank-1 downdates preserve Hermitian symmetry to rounding only;
            # a periodic exact re-symmetrization keeps the drift bounded
            block = m[:k, :k]
            m[:k, :k] = (block + block.conj().T) / 2.0
        removed.append(int(order[k]))
        v[:k] = m[:k, :k] @ h[:k]
        sequence.append(lam)
    ascending = np.argsort(order[:k])
    trace = EliminationTrace(removed_ports=removed, sinr_sequence=np.asarray(sequence))
    return SelectionResult(
        ports=order[:k][ascending],
        combiner=v[:k][ascending],
        sinr=lam,
        trace=trace,
    )


def _geport_naive(problem, target_ports):
    # Reference engine: the reduced interference-plus-noise matrix is
    # re-inverted from scratch every iteration; nothing carries over.
    b = interference_plus_noise_matrix(problem)
    h_act = problem.desired.copy()
    active = np.arange(problem.n_ports)
    removed: list[int] = []
    m = invert_pd(b)
    v = m @ h_act
    lam = float(np.real(h_act.conj() @ v))
    sequence = [lam]
    while len(active) > target_ports:
        energy = v.real * v.real + v.imag * v.imag
        pos = _pick_least_energy(energy, active)
        removed.append(int(active[pos]))
        keep = np.arange(len(active)) != pos
        b = b[np.ix_(keep, keep)]
        h_act = h_act[keep]
        active = active[keep]
        m = invert_pd(b)
        v = m @ h_act
        # clamp: independent re-inversions can wiggle above the previous
        # value by rounding noise on near-flat stretches
        lam = min(float(np.real(h_act.conj() @ v)), lam)
        sequence.append(lam)
    trace = EliminationTrace(removed_ports=removed, sinr_sequence=np.asarray(sequence))
    return SelectionResult(ports=active, combiner=v, sinr=lam, trace=trace)


# ---------------------------------------------------------------------------
# Hybrid decomposition (two RF chains)
# ---------------------------------------------------------------------------


def hybrid_decompose(t):
    """Split an arbitrary combiner into unit-modulus taps and two RF chains.

    Each entry of magnitude r <= 2 is the sum of two unit phasors
    e^{j(theta + alpha)} + e^{j(theta - alpha)} with alpha = arccos(r/2),
    so after scaling t to peak magnitude 2 the pair (F, w) with
    w = [1, 1]/sqrt(2) realizes F w = c t for a real c > 0. The SINR is
    scale-invariant, so two RF chains lose nothing relative to the
    fully digital combiner on the same ports.
    """
    t = np.asarray(t, dtype=complex).reshape(-1)
    peak = float(np.max(np.abs(t))) if t.size else 0.0
    if peak == 0.0:
        raise ValueError("cannot decompose the zero combiner")
    scaled = t * (2.0 / peak)
    r = np.abs(scaled)
    theta = np.angle(scaled)
    alpha = np.arccos(np.clip(r / 2.0, 0.0, 1.0))
    analog = np.column_stack([np.exp(1j * (theta + alpha)), np.exp(1j * (theta - alpha))])
    digital = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    return analog, digital


# ---------------------------------------------------------------------------
# Receiver schemes
# ---------------------------------------------------------------------------


def _problem_sinr(problem: UserLinkProblem, ports: np.ndarray, t_eq: np.ndarray) -> float:
    sig = abs(t_eq.conj() @ problem.desired[ports]) ** 2
    interf = float(np.sum(np.abs(t_eq.conj() @ problem.interference[ports, :]) ** 2))
    noise = float(np.real(t_eq.conj() @ t_eq)) / problem.snr
    return float(sig / (interf + noise))


def _degenerate_solution(l_chains: int, fallback: bool = False) -> CombinerSolution:
    # h = 0 has probability zero but must not crash a Monte Carlo run.
    analog = np.zeros((1, l_chains), dtype=complex)
    analog[0, 0] = 1.0
    digital = np.zeros(l_chains, dtype=complex)
    digital[0] = 1.0
    return CombinerSolution(
        ports=np.array([0]),
        combiner=np.ones(1, dtype=complex),
        analog=analog,
        digital=digital,
        sinr=0.0,
        fallback=fallback,
    )


def fahm_geport_receiver(
    problem: UserLinkProblem,
    target_ports: Optional[int] = None,
    mode: str = "fast",
) -> CombinerSolution:
    """Hybrid multiport receiver with GEPort selection and two RF chains.

    With ``target_ports`` given, eliminates down to that fixed dimension.
    With ``target_ports=None`` the effective-port stopping rule applies:
    the full-set dominant eigenvector fixes P* as the ceiling of its
    effective-port count, elimination stops there, and the solution
    records the effective-port value.
    """
    if not np.any(problem.desired):
        sol = _degenerate_solution(2)
        if target_ports is None:
            sol = dataclasses.replace(sol, effective_ports=1.0)
        return sol
    p_eff = None
    initial_state = None
    if target_ports is None:
        initial_state = interference_plus_noise_inverse(problem)
        v, _ = dominant_gev(problem.desired, initial_state)
        p_eff = effective_ports(v)
        target_ports = stopping_dimension(p_eff, problem.n_ports)
    selection = geport_select(problem, target_ports, mode=mode, initial_state=initial_state)
    analog, digital = hybrid_decompose(selection.combiner)
    return CombinerSolution(
        ports=selection.ports,
        combiner=selection.combiner,
        analog=analog,
        digital=digital,
        sinr=selection.sinr,
        effective_ports=p_eff,
    )


def per_port_sinr(problem: UserLinkProblem) -> np.ndarray:
    """Single-port SINR of every port: |h_p|^2 / (interference_p + 1/snr)."""
    h = problem.desired
    sig = h.real * h.real + h.imag * h.imag
    interf = np.sum(np.abs(problem.interference) ** 2, axis=1)
    return sig / (interf + 1.0 / problem.snr)


def slow_fama_receiver(problem: UserLinkProblem) -> CombinerSolution:
    """Single-RF-chain baseline: pick the best port by per-port SINR."""
    if not np.any(problem.desired):
        return _degenerate_solution(1)
    pps = per_port_sinr(problem)
    best = int(np.argmax(pps))  # argmax resolves ties to the lowest index
    return CombinerSolution(
        ports=np.array([best]),
        combiner=np.ones(1, dtype=complex),
        analog=np.ones((1, 1), dtype=complex),
        digital=np.ones(1, dtype=complex),
        sinr=float(pps[best]),
    )


def dc_receiver(problem: UserLinkProblem, n_selected: int) -> CombinerSolution:
    """Select-then-combine: top ports by per-port SINR, then the optimal
    combiner on that fixed subset, decomposed onto two RF chains."""
    n = problem.n_ports
    if not 1 <= n_selected <= n:
        raise ValueError(f"n_selected must lie in [1, {n}], got {n_selected}")
    if not np.any(problem.desired):
        return _degenerate_solution(2)
    pps = per_port_sinr(problem)
    order = np.argsort(-pps, kind="stable")[:n_selected]
    ports = np.sort(order)
    interf = problem.interference[ports, :]
    b = interf @ interf.conj().T + np.eye(n_selected) / problem.snr
    t = cho_solve(cho_factor((b + b.conj().T) / 2.0), problem.desired[ports])
    sinr = float(np.real(problem.desired[ports].conj() @ t))
    analog, digital = hybrid_decompose(t)
    return CombinerSolution(
        ports=ports,
        combiner=t,
        analog=analog,
        digital=digital,
        sinr=sinr,
    )


def cuma_receiver(problem: UserLinkProblem, rho: float = 0.4, n_max: Optional[int] = None) -> CombinerSolution:
    """Structured analog aggregation of in-phase and quadrature port subsets.

    Ports whose channel is in-phase dominant (|Re| >= |Im|) and within a
    factor ``rho`` of the strongest in-phase component join the I
    subset; quadrature-dominant ports join the Q subset symmetrically.
    Each subset keeps at most ``n_max`` ports (largest respective
    component first). The analog matrix has four columns — cos/sin
    projections of each subset's phase-aligned taps — and the digital
    vector solves the resulting 4x2 real system through a pseudo-inverse
    so that, absent noise and interference, the detected symbol equals
    the transmitted one exactly.

    Analog taps have modulus <= 1 and the digital vector is not
    unit-norm; the returned solution is flagged accordingly. The
    reported SINR is the standard evaluation of the resulting (S, F, w),
    which is valid because the taps are channel-derived constants.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    n = problem.n_ports
    if n_max is None:
        n_max = n
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    h = problem.desired
    if not np.any(h):
        return _degenerate_solution(4, fallback=True)

    abs_re = np.abs(h.real)
    abs_im = np.abs(h.imag)

    def _subset(component, mask_dominant):
        # Keep only ports matching the sign of the strongest component so
        # the analog partial sums add coherently instead of cancelling.
        primary = np.abs(component)
        lead_sign = np.sign(component[np.argmax(primary)])
        mask = (
            mask_dominant
            & (primary >= rho * primary.max())
            & (np.sign(component) == lead_sign)
        )
        cand = np.nonzero(mask)[0]
        if len(cand) > n_max:
            order = np.argsort(-primary[cand], kind="stable")
            cand = cand[order[:n_max]]
        return np.sort(cand)

    in_phase = _subset(h.real, abs_re >= abs_im)
    quadrature = _subset(h.imag, abs_im > abs_re)

    if len(in_phase) == 0 and len(quadrature) == 0:
        # degenerate partition: fall back to the slow-FAMA port, flagged
        base = slow_fama_receiver(problem)
        analog = np.zeros((1, 4), dtype=complex)
        analog[0, 0] = 1.0
        digital = np.zeros(4, dtype=complex)
        digital[0] = 1.0
        return CombinerSolution(
            ports=base.ports,
            combiner=base.combiner,
            analog=analog,
            digital=digital,
            sinr=base.sinr,
            unit_modulus_analog=False,
            fallback=True,
        )

    ports = np.sort(np.concatenate([in_phase, quadrature]))
    in_phase_set = set(in_phase.tolist())
    analog = np.zeros((len(ports), 4), dtype=complex)
    for row, p in enumerate(ports):
        phase = np.angle(h[p])
        col = 0 if p in in_phase_set else 2
        analog[row, col] = np.exp(1j * phase) * np.cos(phase)
        analog[row, col + 1] = np.exp(1j * phase) * np.sin(phase)

    sum_re_i = float(np.sum(h.real[in_phase]))
    sum_im_i = float(np.sum(h.imag[in_phase]))
    sum_re_q = float(np.sum(h.real[quadrature]))
    sum_im_q = float(np.sum(h.imag[quadrature]))
    system = np.array(
        [
            [sum_re_i, -sum_im_i],
            [sum_im_i, sum_re_i],
            [sum_re_q, -sum_im_q],
            [sum_im_q, sum_re_q],
        ]
    )
    w_h = np.array([1.0, 1.0j]) @ np.linalg.pinv(system)
    digital = w_h.conj()

    t_eq = analog @ digital
    sinr = _problem_sinr(problem, ports, t_eq)
    return CombinerSolution(
        ports=ports,
        combiner=t_eq,
        analog=analog,
        digital=digital,
        sinr=sinr,
        unit_modulus_analog=False,
    )
