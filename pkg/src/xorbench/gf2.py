"""GF(2) linear algebra on bit-packed rows.

Rows are plain Python ints used as bitsets (bit j = column j), which keeps
the elimination exact and fast for systems up to a few thousand variables.
"""

from __future__ import annotations

SINGULAR = "SINGULAR"


def rows_from_clauses(clauses, m: int) -> list[int]:
    """Incidence matrix of a clause list: row c has bits i1, i2, i3 set."""
    rows = []
    for cl in clauses:
        i1, i2, i3 = int(cl[0]), int(cl[1]), int(cl[2])
        rows.append((1 << i1) | (1 << i2) | (1 << i3))
    return rows


def matvec(rows: list[int], x_bits: int) -> list[int]:
    """A·x over GF(2); x passed as a bitset, result as a list of parity bits."""
    return [bin(r & x_bits).count("1") & 1 for r in rows]


def gf2_eliminate(rows: list[int], b: list[int], m: int):
    """Solve A·x = b over GF(2) by Gaussian elimination on bit-packed rows.

    Returns ``(rank, solution)`` where solution is a list of m bits when
    rank == m, and the sentinel ``SINGULAR`` otherwise.  Pivots on the first
    set bit of each row.
    """
    if len(rows) != m or len(b) != m:
        raise ValueError("dimension mismatch: need m rows and m rhs bits")
    # augment: bit m holds the rhs
    work = [rows[i] | (b[i] << m) for i in range(m)]
    rank = 0
    pivots = []  # (row_index, column) in elimination order
    for col in range(m):
        pivot = None
        for r in range(rank, m):
            if (work[r] >> col) & 1:
                pivot = r
                break
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        prow = work[rank]
        for r in range(m):
            if r != rank and ((work[r] >> col) & 1):
                work[r] ^= prow
        pivots.append((rank, col))
        rank += 1
        if rank == m:
            break
    if rank < m:
        return rank, SINGULAR
    x = [0] * m
    for r, col in pivots:
        x[col] = (work[r] >> m) & 1
    return rank, x


def gf2_rank(rows: list[int], m: int) -> int:
    """Rank of the m x m bit matrix."""
    rank, _ = gf2_eliminate(rows, [0] * m, m)
    return rank
