"""Deterministic Monte Carlo harness: scenarios, sweeps, elbow, timing.

Reproducibility contract: every realization draws from its own
generator derived counter-style from (master_seed, axis_index,
realization_index) through numpy's SeedSequence spawn keys (PCG64,
period 2^128). Aggregation folds per-realization values in fixed
realization order with compensated summation (math.fsum), so parallel
execution over realizations returns exactly the serial result.
Same-platform reruns are bit-identical; cross-platform bit-exactness is
not promised.

Timing statistics are measurements, not simulation outputs: they are
reported alongside the summary but excluded from its deterministic
serialization.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import (
    GeometricChannelParams,
    PathAngles,
    PortGrid,
    apply_coupling,
    rayleigh_factor,
    sample_geometric_channel,
    sample_rayleigh_channel,
)
from .metrics import outage_probability, spectral_efficiency, wilson_interval
from .receivers import (
    UserLinkProblem,
    cuma_receiver,
    dc_receiver,
    dominant_gev,
    effective_ports,
    fahm_geport_receiver,
    geport_select,
    interference_plus_noise_inverse,
    slow_fama_receiver,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "ChannelSpec",
    "SchemeSpec",
    "ScenarioConfig",
    "SchemeSummary",
    "MetricsSummary",
    "ElbowResult",
    "BenchResult",
    "SCHEME_KINDS",
    "SWEEP_AXES",
    "validate_config",
    "realization_rng",
    "run_scenario",
    "sweep",
    "elbow_curve",
    "bench_timing",
    "resolve_workers",
]

SCHEME_KINDS = ("slow-fama", "dc", "cuma", "fahm-geport", "fahm-geport-naive")
SWEEP_AXES = (
    "riceK_dB",
    "numPaths",
    "users",
    "selectedP",
    "snr_dB",
    "gamma",
    "pOverPeffRatio",
)

_GEPORT_KINDS = ("fahm-geport", "fahm-geport-naive")


class ConfigError(ValueError):
    """Invalid scenario configuration; carries the offending field name."""

    def __init__(self, fieldname: str, message: str):
        super().__init__(f"field '{fieldname}': {message}")
        self.field = fieldname


class NumericalError(RuntimeError):
    """Numerical failure during a run, tagged with realization and scheme."""


@dataclass(frozen=True)
class ChannelSpec:
    """Channel family: rich-scattering Rayleigh or finite-scatterer geometric."""

    kind: str = "rayleigh"  # "rayleigh" | "geometric"
    rice_k_db: float = 0.0
    num_paths: int = 1
    los_theta: float = np.pi / 2
    los_phi: float = 0.0


@dataclass(frozen=True)
class SchemeSpec:
    """One receiver scheme to evaluate, with its parameters."""

    kind: str
    label: Optional[str] = None
    ports_selected: Optional[int] = None
    port_policy: str = "fixed"  # "fixed" | "effective" (geport kinds only)
    rho: float = 0.4
    n_max: Optional[int] = None

    @property
    def name(self) -> str:
        return self.label if self.label is not None else self.kind


@dataclass(frozen=True)
class ScenarioConfig:
    grid: PortGrid
    users: int
    channel: ChannelSpec
    snr_db: float
    schemes: tuple[SchemeSpec, ...]
    realizations: int
    master_seed: int
    gammas: tuple[float, ...] = ()
    coupling: Optional[np.ndarray] = None
    coupling_path: Optional[str] = None

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


def validate_config(cfg: ScenarioConfig) -> None:
    """Raise ConfigError naming the offending field, before any compute."""
    n = cfg.grid.n_ports
    if cfg.users < 1:
        raise ConfigError("users", "must be >= 1 (the BS antenna count equals it)")
    if cfg.realizations < 1:
        raise ConfigError("realizations", "must be >= 1")
    if cfg.channel.kind not in ("rayleigh", "geometric"):
        raise ConfigError("channel", f"unknown channel kind '{cfg.channel.kind}'")
    if cfg.channel.kind == "geometric":
        if cfg.channel.num_paths < 1:
            raise ConfigError("num_paths", "must be >= 1")
        if not np.isfinite(cfg.channel.rice_k_db):
            raise ConfigError("rice_k_dB", "must be finite")
    if not np.isfinite(cfg.snr_db):
        raise ConfigError("snr_dB", "must be finite")
    if not cfg.schemes:
        raise ConfigError("schemes", "at least one scheme is required")
    seen = set()
    for spec in cfg.schemes:
        label = spec.name
        if label in seen:
            raise ConfigError("schemes", f"duplicate scheme label '{label}'")
        seen.add(label)
        if spec.kind not in SCHEME_KINDS:
            raise ConfigError("schemes", f"unknown scheme kind '{spec.kind}'")
        if spec.kind == "dc":
            if spec.ports_selected is None:
                raise ConfigError("ports_selected", f"scheme '{label}' requires ports_selected")
            if not 1 <= spec.ports_selected <= n:
                raise ConfigError(
                    "ports_selected", f"scheme '{label}': must lie in [1, {n}]"
                )
        if spec.kind in _GEPORT_KINDS:
            if spec.port_policy not in ("fixed", "effective"):
                raise ConfigError("port_policy", f"scheme '{label}': unknown policy")
            if spec.port_policy == "fixed":
                if spec.ports_selected is None:
                    raise ConfigError(
                        "ports_selected",
                        f"scheme '{label}' with fixed policy requires ports_selected",
                    )
                if not 1 <= spec.ports_selected <= n:
                    raise ConfigError(
                        "ports_selected", f"scheme '{label}': must lie in [1, {n}]"
                    )
            elif spec.ports_selected is not None:
                raise ConfigError(
                    "ports_selected",
                    f"scheme '{label}': effective policy sets the dimension itself",
                )
        if spec.kind == "cuma":
            if not 0.0 <= spec.rho <= 1.0:
                raise ConfigError("rho", f"scheme '{label}': must lie in [0, 1]")
            if spec.n_max is not None and not 2 <= spec.n_max <= n:
                raise ConfigError("n_max", f"scheme '{label}': must lie in [2, {n}]")
    for g in cfg.gammas:
        if not np.isfinite(g) or g < 0:
            raise ConfigError("gammas", "thresholds must be finite and >= 0")
    if cfg.coupling is not None and cfg.coupling.shape != (n, n):
        raise ConfigError(
            "coupling_file", f"matrix is {cfg.coupling.shape}, grid has {n} ports"
        )


# ---------------------------------------------------------------------------
# Random streams and channel drawing
# ---------------------------------------------------------------------------


def realization_rng(master_seed: int, axis_index: int, realization: int) -> np.random.Generator:
    """Independent generator for one (axis value, realization) cell.

    SeedSequence(entropy=master_seed, spawn_key=(axis_index, realization))
    is numpy's documented splitting mechanism; distinct cells get
    non-overlapping PCG64 streams regardless of execution order.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(axis_index, realization))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class _Shared:
    """Per-scenario precomputed state shipped to workers."""

    factor: Optional[np.ndarray] = None
    geo_params: Optional[GeometricChannelParams] = None


def _prepare_shared(cfg: ScenarioConfig) -> _Shared:
    if cfg.channel.kind == "rayleigh":
        return _Shared(factor=rayleigh_factor(cfg.grid))
    params = GeometricChannelParams(
        rice_k=10.0 ** (cfg.channel.rice_k_db / 10.0),
        num_paths=cfg.channel.num_paths,
        los_angles=PathAngles(cfg.channel.los_theta, cfg.channel.los_phi),
    )
    return _Shared(geo_params=params)


def _draw_channel_set(cfg: ScenarioConfig, shared: _Shared, rng: np.random.Generator):
    """One matrix per user, drawn in user order from a single stream."""
    channels = []
    for _ in range(cfg.users):
        if shared.factor is not None:
            h = sample_rayleigh_channel(shared.factor, cfg.users, rng)
        else:
            h = sample_geometric_channel(cfg.grid, cfg.users, shared.geo_params, rng)
        if cfg.coupling is not None:
            h = apply_coupling(h, cfg.coupling)
        channels.append(h)
    return channels


def _make_solver(spec: SchemeSpec, n_ports: int):
    if spec.kind == "slow-fama":
        return slow_fama_receiver
    if spec.kind == "dc":
        p = spec.ports_selected
        return lambda prob: dc_receiver(prob, p)
    if spec.kind == "cuma":
        n_max = spec.n_max if spec.n_max is not None else n_ports
        rho = spec.rho
        return lambda prob: cuma_receiver(prob, rho=rho, n_max=n_max)
    mode = "fast" if spec.kind == "fahm-geport" else "naive"
    target = spec.ports_selected if spec.port_policy == "fixed" else None
    return lambda prob: fahm_geport_receiver(prob, target_ports=target, mode=mode)


# ---------------------------------------------------------------------------
# Realization execution
# ---------------------------------------------------------------------------


def _realize(args):
    """One Monte Carlo realization: channel draw plus every scheme and user.

    Returns, per scheme, the per-user SE row, the effective-port values
    it produced (effective-policy schemes only) and the wall-clock spent.
    Top-level so process pools can pickle it.
    """
    cfg, shared, axis_index, r = args
    rng = realization_rng(cfg.master_seed, axis_index, r)
    channels = _draw_channel_set(cfg, shared, rng)
    snr = cfg.snr
    out = []
    for spec in cfg.schemes:
        solver = _make_solver(spec, cfg.grid.n_ports)
        se_row = np.empty(cfg.users)
        peffs = []
        start = time.perf_counter()
        for u in range(cfg.users):
            problem = UserLinkProblem.from_channel(channels[u], u, snr)
            try:
                sol = solver(problem)
            except Exception as exc:
                raise NumericalError(
                    f"realization {r}, scheme '{spec.name}', user {u}: {exc}"
                ) from exc
            se_row[u] = spectral_efficiency(sol.sinr)
            if sol.effective_ports is not None:
                peffs.append(float(sol.effective_ports))
        elapsed = time.perf_counter() - start
        out.append((se_row, peffs, elapsed))
    return out


def resolve_workers(workers: Optional[int]) -> int:
    """Requested worker count capped by the FAHM_MAX_WORKERS env var."""
    cap = os.environ.get("FAHM_MAX_WORKERS")
    cap_val = max(1, int(cap)) if cap else None
    if workers is None:
        workers = 1
    workers = max(1, int(workers))
    if cap_val is not None:
        workers = min(workers, cap_val)
    return workers


def _pin_blas():
    # One BLAS thread per process: the matrices are small, so threading
    # only adds spin-wait jitter, and a uniform setting across the serial
    # and worker paths keeps their floating-point results identical.
    threadpool_limits(limits=1)


def _map_realizations(fn, tasks, workers):
    if workers <= 1:
        with threadpool_limits(limits=1):
            return [fn(task) for task in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers, initializer=_pin_blas) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


@dataclass
class _RawResults:
    se: dict  # label -> (R, U) array
    peff: dict  # label -> list of floats
    elapsed: dict  # label -> list of seconds


def _simulate(cfg: ScenarioConfig, axis_index: int, workers: Optional[int]) -> _RawResults:
    shared = _prepare_shared(cfg)
    tasks = [(cfg, shared, axis_index, r) for r in range(cfg.realizations)]
    per_real = _map_realizations(_realize, tasks, resolve_workers(workers))
    se = {}
    peff = {}
    elapsed = {}
    for i, spec in enumerate(cfg.schemes):
        label = spec.name
        se[label] = np.stack([res[i][0] for res in per_real])
        peff[label] = [p for res in per_real for p in res[i][1]]
        elapsed[label] = [res[i][2] for res in per_real]
    return _RawResults(se=se, peff=peff, elapsed=elapsed)


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeSummary:
    label: str
    kind: str
    user_mean_se: float
    sum_se: float
    se_stderr: float
    outage: dict  # gamma -> {"probability", "wilson_low", "wilson_high"}
    mean_peff: Optional[float]
    median_peff: Optional[float]
    mean_ceil_peff: Optional[float]
    timing_ms_mean: float = field(compare=False)
    timing_ms_median: float = field(compare=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "label": self.label,
            "kind": self.kind,
            "user_mean_se": self.user_mean_se,
            "sum_se": self.sum_se,
            "se_stderr": self.se_stderr,
            "outage": {repr(g): dict(v) for g, v in sorted(self.outage.items())},
            "mean_peff": self.mean_peff,
            "median_peff": self.median_peff,
            "mean_ceil_peff": self.mean_ceil_peff,
        }
        if include_timing:
            out["timing_ms"] = {
                "mean": self.timing_ms_mean,
                "median": self.timing_ms_median,
            }
        return out


@dataclass(frozen=True)
class MetricsSummary:
    realizations: int
    users: int
    n_ports: int
    snr_db: float
    schemes: tuple[SchemeSummary, ...]

    def scheme(self, label: str) -> SchemeSummary:
        for s in self.schemes:
            if s.label == label:
                return s
        raise KeyError(label)

    def to_dict(self, include_timing: bool = True) -> dict:
        """JSON-ready dict; drop ``include_timing`` for the deterministic part."""
        return {
            "realizations": self.realizations,
            "users": self.users,
            "n_ports": self.n_ports,
            "snr_dB": self.snr_db,
            "schemes": [s.to_dict(include_timing) for s in self.schemes],
        }


def _fsum_mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values) if values else 0.0


def _summarize(cfg: ScenarioConfig, raw: _RawResults, gammas=None) -> MetricsSummary:
    gammas = cfg.gammas if gammas is None else tuple(gammas)
    summaries = []
    for spec in cfg.schemes:
        label = spec.name
        se = raw.se[label]
        r, u = se.shape
        per_real_mean = [_fsum_mean(row) for row in se]
        user_mean = _fsum_mean(per_real_mean)
        sum_se = _fsum_mean(math.fsum(row) for row in se)
        if r > 1:
            stderr = float(np.std(np.asarray(per_real_mean), ddof=1) / math.sqrt(r))
        else:
            stderr = 0.0
        flat = se.reshape(-1)
        outage = {}
        for g in gammas:
            prob = outage_probability(flat, g)
            lo, hi = wilson_interval(int(round(prob * flat.size)), flat.size)
            outage[float(g)] = {
                "probability": prob,
                "wilson_low": lo,
                "wilson_high": hi,
            }
        peffs = raw.peff[label]
        if peffs:
            mean_peff = _fsum_mean(peffs)
            median_peff = float(np.median(peffs))
            mean_ceil = _fsum_mean(float(math.ceil(p)) for p in peffs)
        else:
            mean_peff = median_peff = mean_ceil = None
        times_ms = [1e3 * t for t in raw.elapsed[label]]
        summaries.append(
            SchemeSummary(
                label=label,
                kind=spec.kind,
                user_mean_se=user_mean,
                sum_se=sum_se,
                se_stderr=stderr,
                outage=outage,
                mean_peff=mean_peff,
                median_peff=median_peff,
                mean_ceil_peff=mean_ceil,
                timing_ms_mean=_fsum_mean(times_ms),
                timing_ms_median=float(np.median(times_ms)) if times_ms else 0.0,
            )
        )
    return MetricsSummary(
        realizations=cfg.realizations,
        users=cfg.users,
        n_ports=cfg.grid.n_ports,
        snr_db=cfg.snr_db,
        schemes=tuple(summaries),
    )


def run_scenario(cfg: ScenarioConfig, axis_index: int = 0, workers: Optional[int] = None) -> MetricsSummary:
    """Run one scenario end to end.

    Deterministic given (cfg, axis_index): reruns and any worker count
    produce identical numbers (timing aside).
    """
    validate_config(cfg)
    raw = _simulate(cfg, axis_index, workers)
    return _summarize(cfg, raw)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _fixed_p_schemes(cfg: ScenarioConfig):
    return [
        spec
        for spec in cfg.schemes
        if spec.kind == "dc" or (spec.kind in _GEPORT_KINDS and spec.port_policy == "fixed")
    ]


def _with_selected_ports(cfg: ScenarioConfig, value: int) -> ScenarioConfig:
    n = cfg.grid.n_ports
    if not 1 <= value <= n:
        raise ConfigError("values", f"selectedP={value} outside [1, {n}]")
    new_schemes = []
    for spec in cfg.schemes:
        if spec in _fixed_p_schemes(cfg):
            new_schemes.append(replace(spec, ports_selected=int(value)))
        else:
            new_schemes.append(spec)
    return replace(cfg, schemes=tuple(new_schemes))


def _apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis == "riceK_dB":
        if cfg.channel.kind != "geometric":
            raise ConfigError("axis", "riceK_dB sweep needs a geometric channel")
        return replace(cfg, channel=replace(cfg.channel, rice_k_db=float(value)))
    if axis == "numPaths":
        if cfg.channel.kind != "geometric":
            raise ConfigError("axis", "numPaths sweep needs a geometric channel")
        if int(value) < 1:
            raise ConfigError("values", "numPaths must be >= 1")
        return replace(cfg, channel=replace(cfg.channel, num_paths=int(value)))
    if axis == "users":
        if int(value) < 1:
            raise ConfigError("values", "users must be >= 1")
        return replace(cfg, users=int(value))
    if axis == "selectedP":
        if not _fixed_p_schemes(cfg):
            raise ConfigError("axis", "selectedP sweep needs a fixed-P scheme")
        return _with_selected_ports(cfg, int(value))
    if axis == "snr_dB":
        return replace(cfg, snr_db=float(value))
    raise ConfigError("axis", f"unknown sweep axis '{axis}' (choose from {SWEEP_AXES})")


def _peff_realize(args):
    """Full-set effective-port count of every user in one realization."""
    cfg, shared, axis_index, r = args
    rng = realization_rng(cfg.master_seed, axis_index, r)
    channels = _draw_channel_set(cfg, shared, rng)
    values = []
    for u in range(cfg.users):
        problem = UserLinkProblem.from_channel(channels[u], u, cfg.snr)
        if not np.any(problem.desired):
            values.append(1.0)
            continue
        state = interference_plus_noise_inverse(problem)
        v, _ = dominant_gev(problem.desired, state)
        values.append(effective_ports(v))
    return values


def estimate_peff_reference(cfg: ScenarioConfig, workers: Optional[int] = None) -> int:
    """Scenario-level effective-port dimension for ratio sweeps.

    Averages the full-set effective-port count over all users and
    realizations (streams of axis index 0) and applies the ceiling rule.
    """
    validate_config(cfg)
    shared = _prepare_shared(cfg)
    tasks = [(cfg, shared, 0, r) for r in range(cfg.realizations)]
    rows = _map_realizations(_peff_realize, tasks, resolve_workers(workers))
    mean_peff = _fsum_mean(p for row in rows for p in row)
    return int(min(max(math.ceil(mean_peff), 1), cfg.grid.n_ports))


def sweep(cfg: ScenarioConfig, axis: str, values, workers: Optional[int] = None):
    """One summary per axis value, each individually reproducible.

    The axis value's position is folded into the stream derivation, so
    each point runs on its own realizations — except the ``gamma`` axis,
    which only moves the outage threshold: there a single simulation is
    shared so the outage curve is exactly non-decreasing.
    """
    validate_config(cfg)
    values = list(values)
    if not values:
        raise ConfigError("values", "sweep needs at least one value")
    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"unknown sweep axis '{axis}' (choose from {SWEEP_AXES})")

    if axis == "gamma":
        # threshold-only axis: share one simulation so the outage curve is
        # exactly monotone; every summary carries the whole gamma set
        raw = _simulate(cfg, 0, workers)
        gam = tuple(float(g) for g in values)
        return [(float(g), _summarize(cfg, raw, gammas=gam)) for g in values]

    if axis == "pOverPeffRatio":
        if not _fixed_p_schemes(cfg):
            raise ConfigError("axis", "pOverPeffRatio sweep needs a fixed-P scheme")
        p_ref = estimate_peff_reference(cfg, workers)
        results = []
        for i, ratio in enumerate(values):
            p = int(min(max(round(float(ratio) * p_ref), 1), cfg.grid.n_ports))
            cfg_i = _with_selected_ports(cfg, p)
            raw = _simulate(cfg_i, i, workers)
            results.append((float(ratio), _summarize(cfg_i, raw)))
        return results

    results = []
    for i, value in enumerate(values):
        cfg_i = _apply_axis(cfg, axis, value)
        validate_config(cfg_i)
        raw = _simulate(cfg_i, i, workers)
        results.append((float(value), _summarize(cfg_i, raw)))
    return results


# ---------------------------------------------------------------------------
# Elbow diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ElbowResult:
    mean_sinr: np.ndarray  # linear scale, index = ports removed
    mean_peff: float
    mean_ceil_peff: float
    realizations: int

    def to_dict(self) -> dict:
        return {
            "mean_sinr": [float(x) for x in self.mean_sinr],
            "mean_peff": self.mean_peff,
            "mean_ceil_peff": self.mean_ceil_peff,
            "realizations": self.realizations,
        }


def _elbow_realize(args):
    cfg, shared, axis_index, r = args
    rng = realization_rng(cfg.master_seed, axis_index, r)
    channels = _draw_channel_set(cfg, shared, rng)
    problem = UserLinkProblem.from_channel(channels[0], 0, cfg.snr)
    n = cfg.grid.n_ports
    if not np.any(problem.desired):
        return np.zeros(n), 1.0
    state = interference_plus_noise_inverse(problem)
    v, _ = dominant_gev(problem.desired, state)
    peff = effective_ports(v)
    sel = geport_select(problem, 1, mode="fast", initial_state=state)
    return sel.trace.sinr_sequence, peff


def elbow_curve(cfg: ScenarioConfig, workers: Optional[int] = None) -> ElbowResult:
    """Realization-averaged dominant-SINR decay under full elimination.

    The configured scheme list must be exactly one fixed fahm-geport
    entry with ports_selected = 1 (eliminate down to a single port). The
    diagnostic follows the first user; users are statistically
    exchangeable here.
    """
    validate_config(cfg)
    if len(cfg.schemes) != 1:
        raise ConfigError("schemes", "elbow mode expects exactly one scheme")
    spec = cfg.schemes[0]
    if spec.kind != "fahm-geport" or spec.port_policy != "fixed" or spec.ports_selected != 1:
        raise ConfigError(
            "schemes", "elbow mode expects fahm-geport with ports_selected = 1"
        )
    shared = _prepare_shared(cfg)
    tasks = [(cfg, shared, 0, r) for r in range(cfg.realizations)]
    rows = _map_realizations(_elbow_realize, tasks, resolve_workers(workers))
    n = cfg.grid.n_ports
    mean_sinr = np.array(
        [_fsum_mean(row[0][k] for row in rows) for k in range(n)]
    )
    mean_peff = _fsum_mean(row[1] for row in rows)
    mean_ceil = _fsum_mean(float(math.ceil(row[1])) for row in rows)
    return ElbowResult(
        mean_sinr=mean_sinr,
        mean_peff=mean_peff,
        mean_ceil_peff=mean_ceil,
        realizations=cfg.realizations,
    )


# ---------------------------------------------------------------------------
# Runtime benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchResult:
    rows: tuple  # (label, kind, median_ms, mean_ms) per scheme
    fast_over_naive_median: float
    timed_runs: int
    warmup_runs: int

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"scheme": lbl, "kind": kind, "median_ms": med, "mean_ms": mean}
                for (lbl, kind, med, mean) in self.rows
            ],
            "fast_over_naive_median": self.fast_over_naive_median,
            "timed_runs": self.timed_runs,
            "warmup_runs": self.warmup_runs,
        }


def bench_timing(cfg: ScenarioConfig, warmup: int = 3) -> BenchResult:
    """Wall-clock per full selection run: fast vs naive on shared channels.

    ``cfg.realizations`` timed runs (>= 20) follow ``warmup`` discarded
    warm-up runs; every run draws a fresh realization, feeds the
    identical first-user problem to every scheme, and checks that the
    two elimination engines return the same ports while being timed.
    """
    validate_config(cfg)
    kinds = {spec.kind for spec in cfg.schemes}
    if not {"fahm-geport", "fahm-geport-naive"} <= kinds:
        raise ConfigError(
            "schemes", "bench mode needs both fahm-geport and fahm-geport-naive"
        )
    if cfg.realizations < 20:
        raise ConfigError("realizations", "bench mode needs >= 20 timed runs")

    shared = _prepare_shared(cfg)
    solvers = [(spec, _make_solver(spec, cfg.grid.n_ports)) for spec in cfg.schemes]
    times: dict[str, list[float]] = {spec.name: [] for spec in cfg.schemes}
    with threadpool_limits(limits=1):  # stable timing on small matrices
        for k in range(warmup + cfg.realizations):
            rng = realization_rng(cfg.master_seed, 0, k)
            channels = _draw_channel_set(cfg, shared, rng)
            problem = UserLinkProblem.from_channel(channels[0], 0, cfg.snr)
            ports_by_key: dict[tuple, dict[str, list]] = {}
            for spec, solver in solvers:
                start = time.perf_counter()
                sol = solver(problem)
                elapsed = time.perf_counter() - start
                if k >= warmup:
                    times[spec.name].append(1e3 * elapsed)
                if spec.kind in _GEPORT_KINDS:
                    key = (spec.port_policy, spec.ports_selected)
                    ports_by_key.setdefault(key, {}).setdefault(spec.kind, []).append(
                        list(sol.ports)
                    )
            for key, by_kind in ports_by_key.items():
                if len(by_kind) == 2:
                    fast_ports = by_kind["fahm-geport"]
                    naive_ports = by_kind["fahm-geport-naive"]
                    if fast_ports != naive_ports:
                        raise NumericalError(
                            f"run {k}: fast and naive elimination disagree on ports {key}"
                        )

    rows = []
    medians = {}
    for spec in cfg.schemes:
        vals = times[spec.name]
        med = float(np.median(vals))
        rows.append((spec.name, spec.kind, med, _fsum_mean(vals)))
        medians.setdefault(spec.kind, med)  # first scheme of each kind sets the ratio
    ratio = medians["fahm-geport"] / medians["fahm-geport-naive"]
    return BenchResult(
        rows=tuple(rows),
        fast_over_naive_median=ratio,
        timed_runs=cfg.realizations,
        warmup_runs=warmup,
    )
