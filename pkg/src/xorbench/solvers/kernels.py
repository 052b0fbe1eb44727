"""Numba kernels for the solver inner loops.

All kernels draw randomness from splitmix64 streams (one uint64 counter per
replica, passed in as an array), so runs are reproducible regardless of
thread scheduling. Energies and local fields are kept in exact int64
arithmetic; a flip of spin i has dE = -2 * s_i * phi_i with
phi_i = h_i + sum_j J_ij s_j.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _next_u64(states, k):
    s = states[k] + _GAMMA
    states[k] = s
    z = (s ^ (s >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _uniform(states, k):
    return (_next_u64(states, k) >> np.uint64(11)) * _INV53


@njit(cache=True, inline="always")
def _randint(states, k, bound):
    return int(_next_u64(states, k) % np.uint64(bound))


@njit(cache=True)
def _init_fields(h, indptr, indices, values, s, phi):
    n = h.size
    for i in range(n):
        acc = h[i]
        for t in range(indptr[i], indptr[i + 1]):
            acc += values[t] * s[indices[t]]
        phi[i] = acc


@njit(cache=True)
def _energy_from_fields(h, s, phi):
    # E = sum h_i s_i + (1/2) sum_i s_i (phi_i - h_i)
    e2 = np.int64(0)
    for i in range(h.size):
        e2 += s[i] * (phi[i] + h[i])
    return e2 // 2


@njit(cache=True)
def _flip(indptr, indices, values, s, phi, i):
    s[i] = -s[i]
    si = s[i]
    for t in range(indptr[i], indptr[i + 1]):
        phi[indices[t]] += 2 * si * values[t]


@njit(cache=True)
def _swap_rows(s, phi, energies, a, b):
    n = s.shape[1]
    for i in range(n):
        tmp = s[a, i]
        s[a, i] = s[b, i]
        s[b, i] = tmp
        tmpf = phi[a, i]
        phi[a, i] = phi[b, i]
        phi[b, i] = tmpf
    tmpe = energies[a]
    energies[a] = energies[b]
    energies[b] = tmpe


@njit(cache=True)
def pt_kernel(h, indptr, indices, values, betas, sweeps_per_swap, max_steps, ground, states, init_state):
    """Parallel tempering first passage, in PT steps.

    Returns (step, hit_config): the 1-based PT step of the first ground-state
    hit (0 if a replica starts in the ground state, -1 on cutoff) and the
    hitting spin configuration. One PT step = sweeps_per_swap Metropolis
    sweeps per replica plus one neighbor swap pass.
    """
    n = h.size
    nrep = betas.size
    s = np.empty((nrep, n), dtype=np.int8)
    phi = np.empty((nrep, n), dtype=np.int64)
    energies = np.empty(nrep, dtype=np.int64)
    for r in range(nrep):
        for i in range(n):
            if init_state.size == n:
                s[r, i] = init_state[i]
            else:
                s[r, i] = 1 if _uniform(states, r) < 0.5 else -1
        _init_fields(h, indptr, indices, values, s[r], phi[r])
        energies[r] = _energy_from_fields(h, s[r], phi[r])
        if energies[r] == ground:
            return 0, s[r].copy()
    swap_stream = nrep
    for step in range(1, max_steps + 1):
        for r in range(nrep):
            beta = betas[r]
            for _ in range(sweeps_per_swap):
                for i in range(n):
                    d_e = -2 * s[r, i] * phi[r, i]
                    if d_e <= 0 or _uniform(states, r) < math.exp(-beta * d_e):
                        _flip(indptr, indices, values, s[r], phi[r], i)
                        energies[r] += d_e
        for k in range(nrep - 1):
            arg = (betas[k] - betas[k + 1]) * (energies[k] - energies[k + 1])
            if arg >= 0 or _uniform(states, swap_stream) < math.exp(arg):
                _swap_rows(s, phi, energies, k, k + 1)
        for r in range(nrep):
            if energies[r] == ground:
                return step, s[r].copy()
    return -1, np.zeros(n, dtype=np.int8)


@njit(cache=True)
def metropolis_histogram(h, indptr, indices, values, beta, sweeps, state):
    """State-visit counts of a plain single-temperature Metropolis chain.

    Samples after every sweep; n must be small (counts indexed by the bit
    pattern of the configuration). Used for stationary-distribution checks.
    """
    n = h.size
    s = np.empty(n, dtype=np.int8)
    states = state
    for i in range(n):
        s[i] = 1 if _uniform(states, 0) < 0.5 else -1
    phi = np.empty(n, dtype=np.int64)
    _init_fields(h, indptr, indices, values, s, phi)
    counts = np.zeros(1 << n, dtype=np.int64)
    for _ in range(sweeps):
        for i in range(n):
            d_e = -2 * s[i] * phi[i]
            if d_e <= 0 or _uniform(states, 0) < math.exp(-beta * d_e):
                _flip(indptr, indices, values, s, phi, i)
        code = 0
        for i in range(n):
            if s[i] < 0:
                code |= 1 << i
        counts[code] += 1
    return counts


@njit(cache=True)
def metropolis_first_passage(h, indptr, indices, values, beta, max_steps, ground, states):
    """Single-flip random-scan Metropolis first passage, one flip attempt per step."""
    n = h.size
    s = np.empty(n, dtype=np.int8)
    for i in range(n):
        s[i] = 1 if _uniform(states, 0) < 0.5 else -1
    phi = np.empty(n, dtype=np.int64)
    _init_fields(h, indptr, indices, values, s, phi)
    energy = _energy_from_fields(h, s, phi)
    if energy == ground:
        return 0
    for step in range(1, max_steps + 1):
        i = _randint(states, 0, n)
        d_e = -2 * s[i] * phi[i]
        if d_e <= 0 or _uniform(states, 0) < math.exp(-beta * d_e):
            _flip(indptr, indices, values, s, phi, i)
            energy += d_e
        if energy == ground:
            return step
    return -1


@njit(cache=True)
def dau_init(h, indptr, indices, values, states, nrep, init_state):
    n = h.size
    s = np.empty((nrep, n), dtype=np.int8)
    phi = np.empty((nrep, n), dtype=np.int64)
    energies = np.empty(nrep, dtype=np.int64)
    for r in range(nrep):
        for i in range(n):
            if init_state.size == n:
                s[r, i] = init_state[i]
            else:
                s[r, i] = 1 if _uniform(states, r) < 0.5 else -1
        _init_fields(h, indptr, indices, values, s[r], phi[r])
        energies[r] = _energy_from_fields(h, s[r], phi[r])
    return s, phi, energies


@njit(cache=True)
def dau_segment(h, indptr, indices, values, s, phi, energies, betas, offsets,
                offset_incs, num_steps, ground, states, step0, max_abs_de):
    """Run every replica for num_steps rejection-free MC steps.

    Each step evaluates all n flip acceptances at threshold dE - offset,
    flips one accepted variable chosen uniformly (reservoir selection), and
    escalates the offset after a fully rejected step. Returns the global
    1-based step of the first ground hit and the hitting replica index,
    or (-1, -1).
    """
    nrep, n = s.shape
    for local in range(num_steps):
        for r in range(nrep):
            beta = betas[r]
            off = offsets[r]
            accepted = 0
            chosen = -1
            for i in range(n):
                d_e = -2 * s[r, i] * phi[r, i]
                a = abs(d_e)
                if a > max_abs_de[r]:
                    max_abs_de[r] = a
                arg = -beta * (d_e - off)
                ok = arg >= 0.0 or _uniform(states, r) < math.exp(arg)
                if ok:
                    accepted += 1
                    if _uniform(states, r) * accepted < 1.0:
                        chosen = i
            if accepted > 0:
                d_e = -2 * s[r, chosen] * phi[r, chosen]
                _flip(indptr, indices, values, s[r], phi[r], chosen)
                energies[r] += d_e
                offsets[r] = 0.0
            else:
                offsets[r] = off + offset_incs[r]
        for r in range(nrep):
            if energies[r] == ground:
                return step0 + local + 1, r
    return -1, -1


@njit(cache=True)
def sb_kernel(h, indptr, indices, values, dt, num_steps, coupling, ground, states):
    """Symplectic-Euler bifurcation dynamics; momentum update first.

    The coupling drive is the negative energy gradient -C * (h_i + sum J x_j)
    so lower Ising energy is favored. Returns (step, sign_readout): the
    1-based Euler step at which the sign readout first attains the ground
    energy, 0 for an initial hit, -1 on cutoff, -2 on |x| overflow past 1e6.
    """
    n = h.size
    x = np.empty(n, dtype=np.float64)
    y = np.empty(n, dtype=np.float64)
    for i in range(n):
        x[i] = (_uniform(states, 0) - 0.5) * 0.2
        y[i] = (_uniform(states, 0) - 0.5) * 0.2
    sgn = np.empty(n, dtype=np.int8)
    phi = np.empty(n, dtype=np.int64)
    for i in range(n):
        sgn[i] = 1 if x[i] >= 0.0 else -1
    _init_fields(h, indptr, indices, values, sgn, phi)
    if _energy_from_fields(h, sgn, phi) == ground:
        return 0, sgn
    denom = num_steps - 1 if num_steps > 1 else 1
    for step in range(1, num_steps + 1):
        p = (step - 1) / denom
        for i in range(n):
            drive = float(h[i])
            for t in range(indptr[i], indptr[i + 1]):
                drive += values[t] * x[indices[t]]
            y[i] += dt * (-(x[i] * x[i] - p + 1.0) * x[i] - coupling * drive)
        for i in range(n):
            x[i] += dt * y[i]
            if abs(x[i]) > 1e6:
                return -2, sgn
        for i in range(n):
            sgn[i] = 1 if x[i] >= 0.0 else -1
        _init_fields(h, indptr, indices, values, sgn, phi)
        if _energy_from_fields(h, sgn, phi) == ground:
            return step, sgn
    return -1, sgn


@njit(cache=True)
def qg_kernel(var_clauses, clause_vars, clause_rhs, flip_prob, num_replicas,
              max_steps, states, init_assign):
    """Quasi-greedy local search on the native parity clauses.

    Each replica picks a uniform variable per step and flips it with
    probability flip_prob[k], k = its violated incident clauses. Returns
    (steps, assignment): the step count of the earliest-halting replica and
    its assignment, or steps = -1 if none halts.
    """
    m = var_clauses.shape[0]
    best = -1
    best_x = np.zeros(m, dtype=np.int8)
    for r in range(num_replicas):
        x = np.empty(m, dtype=np.int8)
        for i in range(m):
            if init_assign.size == m:
                x[i] = init_assign[i]
            else:
                x[i] = 1 if _uniform(states, r) < 0.5 else 0
        violated = np.empty(m, dtype=np.int8)
        total = 0
        for c in range(m):
            parity = x[clause_vars[c, 0]] ^ x[clause_vars[c, 1]] ^ x[clause_vars[c, 2]]
            violated[c] = 1 if parity != clause_rhs[c] else 0
            total += violated[c]
        if total == 0:
            return 0, x
        cap = max_steps if best < 0 else best - 1
        solved_at = -1
        for step in range(1, cap + 1):
            u = _randint(states, r, m)
            k = (violated[var_clauses[u, 0]] + violated[var_clauses[u, 1]]
                 + violated[var_clauses[u, 2]])
            if k > 0 and _uniform(states, r) < flip_prob[k]:
                x[u] = 1 - x[u]
                for t in range(3):
                    c = var_clauses[u, t]
                    if violated[c] == 1:
                        violated[c] = 0
                        total -= 1
                    else:
                        violated[c] = 1
                        total += 1
                if total == 0:
                    solved_at = step
                    break
        if solved_at > 0 and (best < 0 or solved_at < best):
            best = solved_at
            best_x = x.copy()
    return best, best_x
