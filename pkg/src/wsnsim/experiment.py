"""Experiment harness: matched-seed policy comparison and single-parameter
sweeps.

Both policies (and every grid point) see the same deployment and the same
environmental event stream for a given seed, because deployment/traffic
randomness is seeded separately from policy randomness.  Runs may execute
in worker processes; results are keyed and sorted before use, so parallel
and serial execution produce identical output.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .energy import ContractError
from .routing import RandomPolicy, SelectivePolicy
from .simulator import SimConfig, run

SWEEP_PARAMS = ("sensing_radius", "tx_radius")


@dataclass(frozen=True)
class SweepSpec:
    param: str          # 'sensing_radius' or 'tx_radius'
    min_value: float
    max_value: float
    steps: int
    seeds: int
    base_seed: int = 0

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ContractError(f"param must be one of {SWEEP_PARAMS}")
        if self.min_value >= self.max_value:
            raise ContractError("min must be < max")
        if self.min_value <= 0.0:
            raise ContractError("min must be > 0")
        if self.steps < 2:
            raise ContractError("steps must be >= 2")
        if self.seeds < 1:
            raise ContractError("seeds must be >= 1")

    def grid(self) -> list[float]:
        span = self.max_value - self.min_value
        return [self.min_value + k * span / (self.steps - 1) for k in range(self.steps)]


@dataclass(frozen=True)
class RunSummary:
    """What an experiment keeps from one simulation."""

    monitored: int | None
    lifetime: float
    censored: bool
    b_individual: int
    b_local: int
    b_global: int
    constituent_totals: tuple[float, float, float, float, float]  # ind, loc, glob, sink, env
    network_total: float
    delivered: int
    dropped: int
    generated: int


@dataclass
class SweepRow:
    policy: str
    param: str
    param_value: float
    seed: int
    lifetime: float
    censored: bool
    network_total: float


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow]
    # policy -> list of (param_value, mean lifetime) in grid order
    mean_lifetime: dict[str, list[tuple[float, float]]]
    argmax: dict[str, float]          # policy -> grid value with best mean

    def argmax_interior(self, policy: str) -> bool:
        grid = self.spec.grid()
        return self.argmax[policy] not in (grid[0], grid[-1])


@dataclass
class CompareSeedRow:
    seed: int
    monitored: int | None
    lifetime_random: float
    lifetime_selective: float
    censored_random: bool
    censored_selective: bool
    counts_random: tuple[int, int, int]      # b_individual, b_local, b_global
    counts_selective: tuple[int, int, int]


@dataclass
class CompareReport:
    seeds: int
    rows: list[CompareSeedRow]
    mean_lifetime: dict[str, float]
    median_lifetime: dict[str, float]
    selective_win_rate: float
    # fraction of seeds satisfying each packet-overhead inequality:
    # global: random > selective, local: random < selective,
    # individual: random < selective
    overhead_rates: dict[str, float]


def summarize(result) -> RunSummary:
    from .energy import Constituent

    mon = result.monitored_node
    if mon is not None:
        counts = result.packet_counts[mon]
        b_ind, b_loc, b_glob = counts["individual"], counts["local"], counts["global"]
        led = result.ledgers[mon]
        totals = tuple(led.constituent_total(c) for c in Constituent)
    else:
        b_ind = b_loc = b_glob = 0
        totals = (0.0, 0.0, 0.0, 0.0, 0.0)
    return RunSummary(
        monitored=mon,
        lifetime=result.lifetime,
        censored=result.censored,
        b_individual=b_ind,
        b_local=b_loc,
        b_global=b_glob,
        constituent_totals=totals,
        network_total=result.ledger_total(),
        delivered=result.delivered,
        dropped=result.dropped,
        generated=result.generated,
    )


def _run_job(args: tuple[SimConfig, int]) -> RunSummary:
    config, seed = args
    return summarize(run(config, seed))


def _execute(jobs: list[tuple[SimConfig, int]], workers: int) -> list[RunSummary]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _with_policy(config: SimConfig, policy_name: str) -> SimConfig:
    if policy_name == "random":
        return replace(config, policy=RandomPolicy())
    if isinstance(config.policy, SelectivePolicy):
        return config
    return replace(config, policy=SelectivePolicy())


def compare_policies(config: SimConfig, n_seeds: int, base_seed: int = 0,
                     workers: int = 1) -> CompareReport:
    """Run both policies on matched seeds and report lifetime and
    packet-overhead orderings at the monitored node."""
    if n_seeds < 1:
        raise ContractError("n_seeds must be >= 1")
    seeds = [base_seed + k for k in range(n_seeds)]
    jobs = []
    for policy_name in ("random", "selective"):
        cfg = _with_policy(config, policy_name)
        jobs.extend((cfg, seed) for seed in seeds)
    summaries = _execute(jobs, workers)
    per_policy = {
        "random": summaries[:n_seeds],
        "selective": summaries[n_seeds:],
    }
    rows = []
    wins = 0
    glob_ok = loc_ok = ind_ok = 0
    for i, seed in enumerate(seeds):
        r = per_policy["random"][i]
        s = per_policy["selective"][i]
        rows.append(CompareSeedRow(
            seed=seed,
            monitored=s.monitored,
            lifetime_random=r.lifetime,
            lifetime_selective=s.lifetime,
            censored_random=r.censored,
            censored_selective=s.censored,
            counts_random=(r.b_individual, r.b_local, r.b_global),
            counts_selective=(s.b_individual, s.b_local, s.b_global),
        ))
        if s.lifetime > r.lifetime:
            wins += 1
        if r.b_global > s.b_global:
            glob_ok += 1
        if r.b_local < s.b_local:
            loc_ok += 1
        if r.b_individual < s.b_individual:
            ind_ok += 1
    n = float(n_seeds)
    return CompareReport(
        seeds=n_seeds,
        rows=rows,
        mean_lifetime={
            p: statistics.fmean(x.lifetime for x in per_policy[p])
            for p in per_policy
        },
        median_lifetime={
            p: statistics.median(x.lifetime for x in per_policy[p])
            for p in per_policy
        },
        selective_win_rate=wins / n,
        overhead_rates={
            "global": glob_ok / n,
            "local": loc_ok / n,
            "individual": ind_ok / n,
        },
    )


def _apply_param(config: SimConfig, param: str, value: float) -> SimConfig:
    deployment = replace(config.deployment, **{param: value})
    return replace(config, deployment=deployment)


def sweep(config: SimConfig, spec: SweepSpec, policies: tuple[str, ...] = ("random", "selective"),
          workers: int = 1) -> SweepResult:
    """Run the grid for each policy and seed; rows come back sorted by
    (policy, param_value, seed) regardless of execution order."""
    grid = spec.grid()
    jobs = []
    keys = []
    for policy_name in policies:
        for value in grid:
            cfg = _apply_param(_with_policy(config, policy_name), spec.param, value)
            for k in range(spec.seeds):
                jobs.append((cfg, spec.base_seed + k))
                keys.append((policy_name, value, spec.base_seed + k))
    summaries = _execute(jobs, workers)
    by_key = dict(zip(keys, summaries))
    rows = []
    for policy_name in sorted(policies):
        for value in grid:
            for k in range(spec.seeds):
                seed = spec.base_seed + k
                s = by_key[(policy_name, value, seed)]
                rows.append(SweepRow(
                    policy=policy_name,
                    param=spec.param,
                    param_value=value,
                    seed=seed,
                    lifetime=s.lifetime,
                    censored=s.censored,
                    network_total=s.network_total,
                ))
    mean_lifetime: dict[str, list[tuple[float, float]]] = {}
    argmax: dict[str, float] = {}
    for policy_name in sorted(policies):
        curve = []
        for value in grid:
            points = [by_key[(policy_name, value, spec.base_seed + k)].lifetime
                      for k in range(spec.seeds)]
            curve.append((value, statistics.fmean(points)))
        mean_lifetime[policy_name] = curve
        argmax[policy_name] = max(curve, key=lambda pair: (pair[1], -pair[0]))[0]
    return SweepResult(spec=spec, rows=rows, mean_lifetime=mean_lifetime, argmax=argmax)
