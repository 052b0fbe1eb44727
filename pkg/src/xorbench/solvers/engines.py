"""Four first-passage solver engines over a common record interface.

Every run is deterministic in (instance, params, seed) and every reported
success is re-verified by a full from-scratch energy evaluation before the
record is returned.
"""

from __future__ import annotations

import math

import numpy as np

from ..instances import IsingInstance, XorsatInstance, ising_energy, violated_clauses
from . import kernels
from .common import (
    DauParams,
    FirstPassageRecord,
    PtParams,
    QgParams,
    SbParams,
    ising_csr,
    log_betas,
    max_ising_param,
    stream_seed,
)


class SuccessVerificationError(RuntimeError):
    """A kernel reported a ground-state hit that does not re-verify."""


def metropolis_flip_prob(delta_e: float, beta: float) -> float:
    """Metropolis acceptance min(1, exp(-beta * dE))."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return min(1.0, math.exp(-beta * delta_e)) if delta_e > 0 else 1.0


def swap_accept_prob(delta_beta: float, delta_e: float) -> float:
    """Replica-swap acceptance min(1, exp(dBeta * dE)) for a neighbor pair."""
    arg = delta_beta * delta_e
    return 1.0 if arg >= 0 else min(1.0, math.exp(arg))


def _streams(seed: int, count: int) -> np.ndarray:
    return np.array([stream_seed(seed, k) for k in range(count)], dtype=np.uint64)


def _record(solver_id, instance_id, seed, steps, cutoff, flags=()):
    return FirstPassageRecord(
        solver_id=solver_id,
        instance_id=instance_id,
        seed=seed,
        steps_to_solution=steps if steps >= 0 else None,
        success=steps >= 0,
        cutoff_steps=cutoff,
        flags=tuple(flags),
    )


def pt_run(ising: IsingInstance, params: PtParams, seed: int,
           instance_id: str = "", initial_state=None) -> FirstPassageRecord:
    """Parallel tempering first passage; steps counted in PT steps."""
    indptr, indices, values = ising_csr(ising)
    betas = log_betas(params.beta_min, params.beta_max, params.num_replicas,
                      scale=max_ising_param(ising))
    states = _streams(seed, params.num_replicas + 1)
    init = (np.asarray(initial_state, dtype=np.int8) if initial_state is not None
            else np.empty(0, dtype=np.int8))
    steps, config = kernels.pt_kernel(ising.h, indptr, indices, values, betas,
                                      params.sweeps_per_swap, params.max_steps,
                                      ising.ground_energy, states, init)
    if steps >= 0 and ising_energy(ising, config) != ising.ground_energy:
        raise SuccessVerificationError("PT hit does not re-verify")
    return _record("pt", instance_id, seed, steps, params.max_steps)


def adapt_temperatures(betas, measured_acceptances, damping: float = 0.5) -> np.ndarray:
    """Move interior inverse temperatures toward equal swap acceptance.

    Spacings of pairs with above-mean acceptance are widened and below-mean
    narrowed, each by a damped multiplicative factor, then rescaled so the
    endpoints stay fixed. Equal acceptances are a fixed point.
    """
    betas = np.asarray(betas, dtype=np.float64)
    acc = np.asarray(measured_acceptances, dtype=np.float64)
    if betas.ndim != 1 or np.any(np.diff(betas) <= 0):
        raise ValueError("betas must be strictly increasing")
    if acc.size != betas.size - 1:
        raise ValueError("need one acceptance per adjacent pair")
    spacing = np.diff(betas)
    factor = np.clip(1.0 + damping * (acc - acc.mean()), 0.1, None)
    spacing = spacing * factor
    spacing *= (betas[-1] - betas[0]) / spacing.sum()
    out = np.concatenate(([betas[0]], betas[0] + np.cumsum(spacing)))
    out[-1] = betas[-1]
    return out


def dau_run(ising: IsingInstance, params: DauParams, seed: int,
            instance_id: str = "", initial_state=None) -> FirstPassageRecord:
    """Rejection-free parallel tempering with energy offsets and adaptive
    temperatures; steps counted in MC steps (one parallel-update step each).
    """
    indptr, indices, values = ising_csr(ising)
    betas = log_betas(params.beta_min, params.beta_max, params.num_replicas,
                      scale=max_ising_param(ising))
    states = _streams(seed, params.num_replicas)
    swap_rng = np.random.Generator(np.random.Philox(np.uint64(stream_seed(seed, 10_001))))
    init = (np.asarray(initial_state, dtype=np.int8) if initial_state is not None
            else np.empty(0, dtype=np.int8))
    s, phi, energies = kernels.dau_init(ising.h, indptr, indices, values, states,
                                        params.num_replicas, init)
    if np.any(energies == ising.ground_energy):
        r = int(np.argmax(energies == ising.ground_energy))
        if ising_energy(ising, s[r]) != ising.ground_energy:
            raise SuccessVerificationError("DAU initial hit does not re-verify")
        return _record("dau", instance_id, seed, 0, params.max_steps)

    nrep = params.num_replicas
    offsets = np.zeros(nrep, dtype=np.float64)
    if params.offset_increment is not None:
        offset_incs = np.full(nrep, params.offset_increment, dtype=np.float64)
    else:
        offset_incs = np.zeros(nrep, dtype=np.float64)  # calibrated after 1st interval
    max_abs_de = np.zeros(nrep, dtype=np.float64)
    acc_ema = None
    step0 = 0
    first_segment = True
    while step0 < params.max_steps:
        chunk = min(params.repex_interval, params.max_steps - step0)
        hit, r = kernels.dau_segment(ising.h, indptr, indices, values, s, phi,
                                     energies, betas, offsets, offset_incs, chunk,
                                     ising.ground_energy, states, step0, max_abs_de)
        if hit >= 0:
            if ising_energy(ising, s[r]) != ising.ground_energy:
                raise SuccessVerificationError("DAU hit does not re-verify")
            return _record("dau", instance_id, seed, hit, params.max_steps)
        step0 += chunk
        if first_segment and params.offset_increment is None:
            offset_incs[:] = max_abs_de / 100.0
        first_segment = False
        if chunk == params.repex_interval and step0 < params.max_steps:
            if acc_ema is not None:
                betas = adapt_temperatures(betas, acc_ema)
            probs = np.array([
                swap_accept_prob(betas[k] - betas[k + 1],
                                 float(energies[k] - energies[k + 1]))
                for k in range(nrep - 1)
            ])
            acc_ema = probs if acc_ema is None else 0.5 * acc_ema + 0.5 * probs
            u = swap_rng.random(nrep - 1)
            for k in range(nrep - 1):
                if u[k] < probs[k]:
                    s[[k, k + 1]] = s[[k + 1, k]]
                    phi[[k, k + 1]] = phi[[k + 1, k]]
                    energies[[k, k + 1]] = energies[[k + 1, k]]
    return _record("dau", instance_id, seed, -1, params.max_steps)


def dau_step(ising: IsingInstance, s, phi, energy, beta, offset, offset_increment, rng):
    """One rejection-free MC step on a single replica, reference implementation.

    Mutates s and phi in place; returns (energy', offset', accepted). Kept in
    pure numpy as an independently testable counterpart of the kernel.
    """
    d_e = -2 * s.astype(np.int64) * phi
    probs = np.minimum(1.0, np.exp(-beta * (d_e - offset)))
    marks = rng.random(s.size) < probs
    if not marks.any():
        return energy, offset + offset_increment, False
    choices = np.flatnonzero(marks)
    i = int(choices[rng.integers(0, choices.size)])
    s[i] = -s[i]
    for (a, b), val in ising.j.items():
        if a == i:
            phi[b] += 2 * int(s[i]) * val
        elif b == i:
            phi[a] += 2 * int(s[i]) * val
    return energy + int(d_e[i]), 0.0, True


def sb_coupling_scale(ising: IsingInstance) -> float:
    """Default coupling weight 0.5 / (sigma_J * sqrt(n))."""
    vals = np.array(list(ising.j.values()), dtype=np.float64)
    sigma = float(vals.std()) if vals.size else 0.0
    if sigma == 0.0:
        sigma = 1.0
    return 0.5 / (sigma * math.sqrt(ising.n))


def sb_run(ising: IsingInstance, params: SbParams, seed: int,
           instance_id: str = "") -> FirstPassageRecord:
    """Simulated bifurcation first passage; steps counted in Euler steps."""
    indptr, indices, values = ising_csr(ising)
    coupling = (params.coupling_scale if params.coupling_scale is not None
                else sb_coupling_scale(ising))
    cutoff = params.loops * params.num_steps
    flags = ()
    for loop in range(params.loops):
        states = np.array([stream_seed(seed, loop)], dtype=np.uint64)
        steps, config = kernels.sb_kernel(ising.h, indptr, indices, values,
                                          params.dt, params.num_steps, coupling,
                                          ising.ground_energy, states)
        if steps == -2:
            flags = ("overflow",)
            steps = -1
        if steps >= 0:
            if ising_energy(ising, config) != ising.ground_energy:
                raise SuccessVerificationError("SB hit does not re-verify")
            return _record("sb", instance_id, seed,
                           loop * params.num_steps + steps, cutoff, flags)
    return _record("sb", instance_id, seed, -1, cutoff, flags)


def quasigreedy_run(inst: XorsatInstance, params: QgParams, seed: int,
                    initial_assignment=None) -> FirstPassageRecord:
    """Quasi-greedy multi-replica search on the native cubic form.

    Steps are per-replica (the replicas run in parallel); the run succeeds
    when any replica reaches zero violated clauses.
    """
    m = inst.m
    clause_vars = np.array([[c[0], c[1], c[2]] for c in inst.clauses], dtype=np.int64)
    clause_rhs = np.array([c[3] for c in inst.clauses], dtype=np.int8)
    var_clauses = np.full((m, 3), -1, dtype=np.int64)
    fill = np.zeros(m, dtype=np.int64)
    for c in range(m):
        for v in clause_vars[c]:
            var_clauses[v, fill[v]] = c
            fill[v] += 1
    if np.any(fill != 3):
        raise ValueError("instance is not 3-regular")
    states = _streams(seed, params.num_replicas)
    init = (np.asarray(initial_assignment, dtype=np.int8) if initial_assignment is not None
            else np.empty(0, dtype=np.int8))
    steps, assign = kernels.qg_kernel(var_clauses, clause_vars, clause_rhs,
                                      np.asarray(params.flip_prob, dtype=np.float64),
                                      params.num_replicas, params.max_steps, states, init)
    if steps >= 0 and violated_clauses(inst, assign) != 0:
        raise SuccessVerificationError("quasi-greedy hit does not re-verify")
    return _record("qg", inst.instance_id, seed, steps, params.max_steps)
