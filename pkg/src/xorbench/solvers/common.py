"""Shared solver plumbing: parameters, first-passage records, RNG streams."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np

from ..instances import IsingInstance


@dataclass(frozen=True)
class PtParams:
    num_replicas: int = 32
    beta_min: float = 0.1
    beta_max: float = 20.0
    sweeps_per_swap: int = 10
    max_steps: int = 100_000

    def __post_init__(self):
        if self.num_replicas < 2:
            raise ValueError("num_replicas must be >= 2")
        if not (0 < self.beta_min < self.beta_max):
            raise ValueError("need 0 < beta_min < beta_max")


@dataclass(frozen=True)
class DauParams:
    num_replicas: int = 26
    repex_interval: int = 2500
    offset_increment: float | None = None  # None = automatic per-replica choice
    beta_min: float = 0.1
    beta_max: float = 20.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.repex_interval < 1:
            raise ValueError("repex_interval must be >= 1")
        if self.offset_increment is not None and self.offset_increment < 0:
            raise ValueError("offset_increment must be >= 0")


@dataclass(frozen=True)
class SbParams:
    dt: float = 0.9
    num_steps: int = 10_000
    coupling_scale: float | None = None  # None = 0.5 / (sigma_J * sqrt(n))
    loops: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.num_steps < 1:
            raise ValueError("num_steps must be >= 1")
        if self.loops < 1:
            raise ValueError("loops must be >= 1")


@dataclass(frozen=True)
class QgParams:
    flip_prob: tuple = (0.0, 0.25, 1.0, 1.0)  # indexed by violated incident clauses
    num_replicas: int = 32
    max_steps: int = 100_000

    def __post_init__(self):
        p = self.flip_prob
        if len(p) != 4 or p[0] != 0.0 or any(not (0.0 <= v <= 1.0) for v in p):
            raise ValueError("flip_prob must be 4 values in [0,1] with p[0] = 0")


@dataclass(frozen=True)
class FirstPassageRecord:
    solver_id: str
    instance_id: str
    seed: int
    steps_to_solution: int | None
    success: bool
    cutoff_steps: int
    per_step_cost_ns: float | None = None
    flags: tuple = ()

    def to_log_dict(self, params_hash: str) -> dict:
        return {
            "solver_id": self.solver_id,
            "instance_id": self.instance_id,
            "seed": self.seed,
            "params_hash": params_hash,
            "steps": self.steps_to_solution,
            "cutoff": self.cutoff_steps,
            "success": self.success,
            "per_step_cost_ns": self.per_step_cost_ns,
            "flags": list(self.flags),
        }


def params_hash(params) -> str:
    payload = json.dumps(asdict(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def log_betas(beta_min: float, beta_max: float, count: int, scale: float = 1.0) -> np.ndarray:
    """Log-uniform inverse-temperature ladder, divided by the normalization scale."""
    return np.geomspace(beta_min, beta_max, count) / scale


def max_ising_param(ising: IsingInstance) -> int:
    """Largest magnitude among fields and couplings; temperature normalization."""
    mags = [abs(int(v)) for v in ising.h] + [abs(v) for v in ising.j.values()]
    return max(mags) if mags else 1


def ising_csr(ising: IsingInstance):
    """Symmetric CSR-style adjacency (indptr, indices, values) for kernel use."""
    n = ising.n
    deg = np.zeros(n, dtype=np.int64)
    for (a, b) in ising.j:
        deg[a] += 1
        deg[b] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    indices = np.zeros(indptr[-1], dtype=np.int64)
    values = np.zeros(indptr[-1], dtype=np.int64)
    cursor = indptr[:-1].copy()
    for (a, b), val in ising.j.items():
        indices[cursor[a]] = b
        values[cursor[a]] = val
        cursor[a] += 1
        indices[cursor[b]] = a
        values[cursor[b]] = val
        cursor[b] += 1
    return indptr, indices, values


def stream_seed(seed: int, stream: int) -> int:
    """Stable 64-bit sub-stream seed derived from (seed, stream)."""
    payload = f"{seed}:{stream}".encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def best_of_replicas(records: list) -> FirstPassageRecord:
    """Minimum first-passage over independent replica runs of one instance.

    Models hardware replica parallelism: the combined run succeeds if any
    replica did, at the earliest replica's step count.
    """
    if not records:
        raise ValueError("no records")
    successes = [r for r in records if r.success]
    if not successes:
        base = records[0]
        return FirstPassageRecord(
            solver_id=base.solver_id,
            instance_id=base.instance_id,
            seed=base.seed,
            steps_to_solution=None,
            success=False,
            cutoff_steps=base.cutoff_steps,
            flags=("best_of", f"replicas={len(records)}"),
        )
    best = min(successes, key=lambda r: r.steps_to_solution)
    return FirstPassageRecord(
        solver_id=best.solver_id,
        instance_id=best.instance_id,
        seed=records[0].seed,
        steps_to_solution=best.steps_to_solution,
        success=True,
        cutoff_steps=best.cutoff_steps,
        flags=("best_of", f"replicas={len(records)}"),
    )
