"""GF(2) linear algebra on integer bitmasks.

Vectors over GF(2) are plain Python ints (bit i = coordinate i), which keeps
row operations word-parallel. Matrices are lists of such ints.
"""
from __future__ import annotations


def parity(mask: int) -> int:
    return bin(mask).count("1") & 1


def weight(mask: int) -> int:
    return bin(mask).count("1")


def mask_from_indices(indices, n: int | None = None) -> int:
    m = 0
    for i in indices:
        if n is not None and not (0 <= i < n):
            raise ValueError(f"index {i} out of range for n={n}")
        m |= 1 << i
    return m


def indices_from_mask(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class RowEchelon:
    """Incremental row-echelon basis of a GF(2) row space."""

    def __init__(self, rows=()):
        self.pivots: dict[int, int] = {}  # pivot bit -> reduced row
        for r in rows:
            self.add(r)

    def reduce(self, v: int) -> int:
        for p in sorted(self.pivots, reverse=True):
            if v >> p & 1:
                v ^= self.pivots[p]
        return v

    def add(self, v: int) -> bool:
        """Insert v; returns True if it enlarged the span."""
        v = self.reduce(v)
        if v == 0:
            return False
        p = v.bit_length() - 1
        # back-substitute to keep rows fully reduced
        for q, row in list(self.pivots.items()):
            if row >> p & 1:
                self.pivots[q] = row ^ v
        self.pivots[p] = v
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def rows(self) -> list[int]:
        return [self.pivots[p] for p in sorted(self.pivots, reverse=True)]

    def decompose(self, v: int, generators: list[int]) -> list[int] | None:
        """Indices of generators whose XOR equals v, or None if v not in span.

        Uses forward elimination over the generator list, so the result is
        deterministic for a fixed generator order.
        """
        basis: list[tuple[int, int]] = []  # (reduced row, combo mask over generators)
        for gi, g in enumerate(generators):
            r, combo = g, 1 << gi
            for row, c in basis:
                if r >> (row.bit_length() - 1) & 1:
                    r ^= row
                    combo ^= c
            if r:
                basis.append((r, combo))
                basis.sort(key=lambda t: -t[0])
        r, combo = v, 0
        for row, c in basis:
            if r >> (row.bit_length() - 1) & 1:
                r ^= row
                combo ^= c
        if r:
            return None
        return indices_from_mask(combo)


def rank(rows) -> int:
    return RowEchelon(rows).rank


def kernel_basis(rows: list[int], n: int) -> list[int]:
    """Basis of {v : <v, row> = 0 mod 2 for all rows}, vectors of length n."""
    # transpose-free: run Gaussian elimination on the rows, track pivot columns,
    # then read kernel vectors off the free columns.
    reduced: list[int] = []
    pivot_cols: list[int] = []
    for r in rows:
        for pr, pc in zip(reduced, pivot_cols):
            if r >> pc & 1:
                r ^= pr
        if r:
            c = r.bit_length() - 1
            # normalize previous rows
            for i, pr in enumerate(reduced):
                if pr >> c & 1:
                    reduced[i] = pr ^ r
            reduced.append(r)
            pivot_cols.append(c)
    free_cols = [c for c in range(n) if c not in pivot_cols]
    basis = []
    for fc in free_cols:
        v = 1 << fc
        for pr, pc in zip(reduced, pivot_cols):
            if pr >> fc & 1:
                v |= 1 << pc
        basis.append(v)
    return basis


def solve(rows: list[int], n: int, target_parities: int) -> int | None:
    """One v with <v, rows[j]> = bit j of target_parities, or None.

    Deterministic: Gaussian elimination with lowest-index pivots.
    """
    # Work with the system A v = b where A has the given rows.
    aug = [(rows[j], target_parities >> j & 1) for j in range(len(rows))]
    pivots: list[tuple[int, int]] = []  # (col, row index into reduced)
    reduced: list[tuple[int, int]] = []
    for r, b in aug:
        for (rr, rb), (col, _) in zip(reduced, pivots):
            if r >> col & 1:
                r ^= rr
                b ^= rb
        if r == 0:
            if b:
                return None
            continue
        col = (r & -r).bit_length() - 1  # lowest set bit as pivot
        reduced.append((r, b))
        pivots.append((col, len(reduced) - 1))
    v = 0
    # back-substitute in reverse insertion order
    for (col, idx) in reversed(pivots):
        r, b = reduced[idx]
        acc = parity(r & v) ^ b
        if acc:
            v |= 1 << col
    return v
