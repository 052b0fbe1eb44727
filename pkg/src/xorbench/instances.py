"""Planted 3-regular 3-XORSAT instances and their two-body reductions.

An instance has m binary variables and m parity clauses of 3 distinct
variables each, with every variable appearing in exactly 3 clauses.  The
right-hand sides are set from a uniformly drawn planted assignment, and the
GF(2) system is required to be full rank so the plant is the unique
solution.  Each clause is then replaced by a 4-spin gadget (one auxiliary
spin per clause), giving an integer Ising problem on n = 2m spins with
ground energy -4m, and an equivalent QUBO.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .gf2 import SINGULAR, gf2_eliminate, matvec, rows_from_clauses

DEFAULT_ATTEMPT_CAP = 10_000

# Gadget parameters (h, h_aux, J, J_aux) for a negatively signed clause,
# i.e. one whose satisfying triples have product +1.
GADGET_H = -1
GADGET_H_AUX = -2
GADGET_J = 1
GADGET_J_AUX = 2


class GenerationFailure(RuntimeError):
    """Raised when sampling/rank rejection exceeds the attempt cap."""


@dataclass(frozen=True)
class ClauseGraph:
    """3-regular bipartite clause-variable incidence from the configuration model."""

    m: int
    clauses: np.ndarray  # (m, 3) int32 variable indices, distinct within a row
    rejected_matchings: int  # matchings thrown away for a repeated in-clause variable


@dataclass(frozen=True)
class XorsatInstance:
    m: int
    clauses: tuple  # m entries (i1, i2, i3, b)
    planted: tuple  # m bits
    seed: int
    instance_id: str = ""
    rejected_matchings: int = 0
    rank_rejections: int = 0
    shared_pair_clauses: int = 0  # clause pairs sharing 2 variables (allowed, audited)

    def __post_init__(self):
        if not self.instance_id:
            object.__setattr__(self, "instance_id", instance_content_hash(self))

    @property
    def n(self) -> int:
        return 2 * self.m


@dataclass(frozen=True)
class IsingInstance:
    n: int
    h: np.ndarray  # (n,) int64
    j: dict  # {(i, j): int} with i < j
    ground_energy: int
    aux_map: tuple  # clause index -> auxiliary spin index


@dataclass(frozen=True)
class QuboInstance:
    n: int
    q: dict  # {(i, j): int} with i <= j; diagonal = linear terms
    offset: int
    ground_value: int


def instance_content_hash(inst: XorsatInstance) -> str:
    payload = json.dumps(
        {"m": inst.m, "clauses": [list(c) for c in inst.clauses], "planted": list(inst.planted)},
        separators=(",", ":"),
    ).encode()
    return hashlib.sha256(payload).hexdigest()


def sample_3regular(m: int, rng_seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP) -> ClauseGraph:
    """Sample a 3-regular clause-variable graph via the configuration model.

    Every variable contributes 3 stubs; a uniform matching of stubs to clause
    slots is drawn, and any matching that puts the same variable twice in one
    clause is rejected wholesale and redrawn.
    """
    if m < 4:
        raise ValueError("m must be >= 4")
    rng = np.random.Generator(np.random.Philox(np.uint64(rng_seed)))
    stubs = np.repeat(np.arange(m, dtype=np.int32), 3)
    rejected = 0
    for _ in range(attempt_cap):
        clauses = rng.permutation(stubs).reshape(m, 3)
        srt = np.sort(clauses, axis=1)
        if np.all(np.diff(srt, axis=1) != 0):
            return ClauseGraph(m=m, clauses=clauses, rejected_matchings=rejected)
        rejected += 1
    raise GenerationFailure(f"no clause-distinct matching in {attempt_cap} attempts (m={m})")


def _count_shared_pairs(clauses: np.ndarray) -> int:
    """Clause pairs that share two variables (multi-edges in the clause graph)."""
    pair_seen: dict = {}
    count = 0
    for row in np.sort(clauses, axis=1):
        a, b, c = int(row[0]), int(row[1]), int(row[2])
        for p in ((a, b), (a, c), (b, c)):
            if p in pair_seen:
                count += 1
            pair_seen[p] = True
    return count


def generate_instance(m: int, rng_seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP) -> XorsatInstance:
    """Generate a planted full-rank 3R3X instance, deterministic in the seed.

    Loops: sample graph, reject unless the GF(2) incidence matrix has full
    rank, then draw the planted assignment uniformly and set the clause
    parities to satisfy it.
    """
    rng = np.random.Generator(np.random.Philox(np.uint64(rng_seed)))
    rejected_matchings = 0
    rank_rejections = 0
    for _ in range(attempt_cap):
        sub_seed = int(rng.integers(0, 2**63))
        graph = sample_3regular(m, sub_seed, attempt_cap=attempt_cap)
        rejected_matchings += graph.rejected_matchings
        rows = rows_from_clauses(graph.clauses, m)
        rank, sol = gf2_eliminate(rows, [0] * m, m)
        if sol == SINGULAR and rank < m:
            rank_rejections += 1
            continue
        planted = rng.integers(0, 2, size=m).astype(np.int8)
        x_bits = 0
        for i in range(m):
            x_bits |= int(planted[i]) << i
        b = matvec(rows, x_bits)
        clauses = tuple(
            (int(c[0]), int(c[1]), int(c[2]), b[ci]) for ci, c in enumerate(graph.clauses)
        )
        return XorsatInstance(
            m=m,
            clauses=clauses,
            planted=tuple(int(v) for v in planted),
            seed=rng_seed,
            rejected_matchings=rejected_matchings,
            rank_rejections=rank_rejections,
            shared_pair_clauses=_count_shared_pairs(graph.clauses),
        )
    raise GenerationFailure(f"no full-rank system in {attempt_cap} attempts (m={m})")


def clause_gadget(sign: int):
    """Ising terms of the 4-spin clause gadget.

    Returns ``(h3, h_aux, j_pairs, j_aux)`` where h3 is the field on each of
    the three clause spins as a 3-vector, j_pairs the couplings on the pairs
    (0,1), (1,2), (0,2), and j_aux the aux-clause couplings per clause spin.
    sign 0 wants product s1*s2*s3 = +1; sign 1 negates all four fields while
    keeping the couplings (a global spin flip of the sign-0 gadget), which
    maps the product -1 triples onto the sign-0 minima and keeps the gadget
    symmetric in its three clause spins.
    """
    if sign not in (0, 1):
        raise ValueError(f"invalid clause sign {sign!r}")
    flip = -1 if sign == 1 else 1
    h3 = [flip * GADGET_H] * 3
    h_aux = flip * GADGET_H_AUX
    j_pairs = [GADGET_J] * 3  # (0,1), (1,2), (0,2)
    j_aux = [GADGET_J_AUX] * 3
    return h3, h_aux, j_pairs, j_aux


def gadget_energy(sign: int, s1: int, s2: int, s3: int, sa: int) -> int:
    h3, h_aux, j_pairs, j_aux = clause_gadget(sign)
    s = (s1, s2, s3)
    e = sum(h3[k] * s[k] for k in range(3)) + h_aux * sa
    e += j_pairs[0] * s1 * s2 + j_pairs[1] * s2 * s3 + j_pairs[2] * s1 * s3
    e += sum(j_aux[k] * s[k] * sa for k in range(3))
    return e


def gadget_minima(sign: int):
    """Exhaustive minima of the 16 gadget configurations: (min_energy, triples)."""
    best = None
    argmin = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                for sa in (1, -1):
                    e = gadget_energy(sign, s1, s2, s3, sa)
                    if best is None or e < best:
                        best = e
                        argmin = [(s1, s2, s3, sa)]
                    elif e == best:
                        argmin.append((s1, s2, s3, sa))
    return best, argmin


def _verify_gadgets():
    for sign in (0, 1):
        want = 1 if sign == 0 else -1
        best, argmin = gadget_minima(sign)
        triples = {cfg[:3] for cfg in argmin}
        sat = {
            (s1, s2, s3)
            for s1 in (1, -1)
            for s2 in (1, -1)
            for s3 in (1, -1)
            if s1 * s2 * s3 == want
        }
        if best != -4 or len(argmin) != 4 or triples != sat:
            raise AssertionError(f"clause gadget broken for sign {sign}")


_verify_gadgets()


def to_ising(inst: XorsatInstance) -> IsingInstance:
    """Reduce to a two-body integer Ising problem with one aux spin per clause."""
    m = inst.m
    n = 2 * m
    h = np.zeros(n, dtype=np.int64)
    j: dict = {}

    def add_j(a, b, val):
        if a > b:
            a, b = b, a
        j[(a, b)] = j.get((a, b), 0) + val

    aux_map = []
    for c, (i1, i2, i3, b) in enumerate(inst.clauses):
        ia = m + c
        aux_map.append(ia)
        h3, h_aux, j_pairs, j_aux = clause_gadget(b)
        idx = (i1, i2, i3)
        for k in range(3):
            h[idx[k]] += h3[k]
            add_j(idx[k], ia, j_aux[k])
        add_j(i1, i2, j_pairs[0])
        add_j(i2, i3, j_pairs[1])
        add_j(i1, i3, j_pairs[2])
        h[ia] += h_aux
    j = {k: v for k, v in j.items() if v != 0}
    return IsingInstance(n=n, h=h, j=j, ground_energy=-4 * m, aux_map=tuple(aux_map))


def optimal_aux(sign: int, s1: int, s2: int, s3: int) -> int:
    """The auxiliary spin value minimizing the gadget energy for a fixed triple."""
    e_plus = gadget_energy(sign, s1, s2, s3, 1)
    e_minus = gadget_energy(sign, s1, s2, s3, -1)
    return 1 if e_plus <= e_minus else -1


def planted_spin_config(inst: XorsatInstance) -> np.ndarray:
    """The planted assignment as spins, extended with gadget-optimal auxiliaries."""
    m = inst.m
    s = np.empty(2 * m, dtype=np.int8)
    for i in range(m):
        s[i] = 1 - 2 * inst.planted[i]
    for c, (i1, i2, i3, b) in enumerate(inst.clauses):
        s[m + c] = optimal_aux(b, int(s[i1]), int(s[i2]), int(s[i3]))
    return s


def ising_to_qubo(ising: IsingInstance) -> QuboInstance:
    """Exact substitution s = 1 - 2x: QUBO value + offset == Ising energy."""
    n = ising.n
    q: dict = {}

    def add_q(a, b, val):
        if a > b:
            a, b = b, a
        q[(a, b)] = q.get((a, b), 0) + val

    offset = int(ising.h.sum())
    for i in range(n):
        add_q(i, i, -2 * int(ising.h[i]))
    for (a, b), val in ising.j.items():
        offset += val
        add_q(a, b, 4 * val)
        add_q(a, a, -2 * val)
        add_q(b, b, -2 * val)
    q = {k: v for k, v in q.items() if v != 0}
    return QuboInstance(n=n, q=q, offset=offset, ground_value=ising.ground_energy - offset)


def ising_energy(ising: IsingInstance, spins) -> int:
    """Exact integer energy sum(h_i s_i) + sum_{i<j} J_ij s_i s_j."""
    s = np.asarray(spins)
    if s.shape != (ising.n,):
        raise ValueError(f"configuration length {s.shape} != {ising.n}")
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be +/-1")
    e = int(np.dot(ising.h, s.astype(np.int64)))
    for (a, b), val in ising.j.items():
        e += val * int(s[a]) * int(s[b])
    return e


def qubo_value(qubo: QuboInstance, bits) -> int:
    """Exact integer QUBO value sum Q_ij x_i x_j (no offset applied)."""
    x = np.asarray(bits)
    if x.shape != (qubo.n,):
        raise ValueError(f"configuration length {x.shape} != {qubo.n}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("bits must be 0/1")
    e = 0
    for (a, b), val in qubo.q.items():
        e += val * int(x[a]) * int(x[b])
    return e


def violated_clauses(inst: XorsatInstance, bits) -> int:
    """Number of parity clauses violated by a 0/1 assignment."""
    x = np.asarray(bits)
    if x.shape != (inst.m,):
        raise ValueError(f"assignment length {x.shape} != {inst.m}")
    count = 0
    for i1, i2, i3, b in inst.clauses:
        if (int(x[i1]) ^ int(x[i2]) ^ int(x[i3])) != b:
            count += 1
    return count


def brute_force_unique_solutions(inst: XorsatInstance) -> list:
    """All satisfying assignments by exhaustive enumeration (m small)."""
    sols = []
    for v in range(1 << inst.m):
        bits = [(v >> i) & 1 for i in range(inst.m)]
        if violated_clauses(inst, bits) == 0:
            sols.append(bits)
    return sols


# ---------------------------------------------------------------------------
# serialization

FORMAT_VERSION = 1


def instance_to_dict(inst: XorsatInstance) -> dict:
    ising = to_ising(inst)
    qubo = ising_to_qubo(ising)
    return {
        "format_version": FORMAT_VERSION,
        "m": inst.m,
        "n": inst.n,
        "clauses": [list(c) for c in inst.clauses],
        "planted": list(inst.planted),
        "ising": {
            "h": [int(v) for v in ising.h],
            "j": [[a, b, int(v)] for (a, b), v in sorted(ising.j.items())],
            "ground_energy": ising.ground_energy,
        },
        "qubo": {
            "q": [[a, b, int(v)] for (a, b), v in sorted(qubo.q.items())],
            "offset": qubo.offset,
            "ground_value": qubo.ground_value,
        },
        "seed": inst.seed,
        "instance_id": inst.instance_id,
        "audit": {
            "rejected_matchings": inst.rejected_matchings,
            "rank_rejections": inst.rank_rejections,
            "shared_pair_clauses": inst.shared_pair_clauses,
        },
    }


def instance_to_json(inst: XorsatInstance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":")) + "\n"


def instance_from_dict(d: dict) -> XorsatInstance:
    inst = XorsatInstance(
        m=d["m"],
        clauses=tuple(tuple(c) for c in d["clauses"]),
        planted=tuple(d["planted"]),
        seed=d.get("seed", -1),
        rejected_matchings=d.get("audit", {}).get("rejected_matchings", 0),
        rank_rejections=d.get("audit", {}).get("rank_rejections", 0),
        shared_pair_clauses=d.get("audit", {}).get("shared_pair_clauses", 0),
    )
    if inst.instance_id != d["instance_id"]:
        raise ValueError(f"instance_id mismatch for {d['instance_id']}")
    return inst


def ising_from_dict(d: dict) -> IsingInstance:
    m = d["m"]
    section = d["ising"]
    return IsingInstance(
        n=d["n"],
        h=np.asarray(section["h"], dtype=np.int64),
        j={(a, b): v for a, b, v in section["j"]},
        ground_energy=section["ground_energy"],
        aux_map=tuple(range(m, 2 * m)),
    )
