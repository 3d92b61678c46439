"""Binary-symplectic Pauli algebra with exact phase tracking.

A PauliString is stored in the canonical form ``i^phase * X^x * Z^z`` where
``x`` and ``z`` are bitmasks (bit q set means X resp. Z acts on qubit q) and
``phase`` is an exponent of i modulo 4.  All products and conjugations are
word-parallel bit operations on Python ints, so symplectic inner products are
popcounts regardless of qubit count.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import gf2

_PHASE_LABEL = {0: "+", 1: "+i", 2: "-", 3: "-i"}


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        if self.x >> self.n or self.z >> self.n:
            raise ValueError("support exceeds qubit count")
        object.__setattr__(self, "phase", self.phase & 3)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity(n: int) -> "PauliString":
        return PauliString(n)

    @staticmethod
    def from_indices(n: int, xs=(), zs=(), phase: int = 0) -> "PauliString":
        return PauliString(n, gf2.mask_from_indices(xs, n), gf2.mask_from_indices(zs, n), phase)

    @staticmethod
    def single(n: int, q: int, kind: str) -> "PauliString":
        if kind == "X":
            return PauliString(n, 1 << q, 0)
        if kind == "Z":
            return PauliString(n, 0, 1 << q)
        if kind == "Y":  # Y = i X Z
            return PauliString(n, 1 << q, 1 << q, 1)
        raise ValueError(f"unknown Pauli kind {kind!r}")

    # -- basic queries -----------------------------------------------------

    @property
    def weight(self) -> int:
        return gf2.weight(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def is_hermitian(self) -> bool:
        # a Pauli with an odd number of Y factors needs an odd i-exponent
        return (self.phase & 1) == (gf2.weight(self.x & self.z) & 1)

    def symplectic(self) -> int:
        """(x || z) as a 2n-bit vector; phase dropped."""
        return self.x | (self.z << self.n)

    # -- group operations ----------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} != {other.n}")
        phase = self.phase + other.phase + 2 * gf2.parity(self.z & other.x)
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z, phase)

    def inverse(self) -> "PauliString":
        # (i^k X Z)^-1 = i^-k Z X = i^{-k} (-1)^{|x&z|} X Z
        phase = -self.phase + 2 * gf2.weight(self.x & self.z)
        return PauliString(self.n, self.x, self.z, phase)

    def commutes(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} != {other.n}")
        return gf2.parity(self.x & other.z) == gf2.parity(self.z & other.x)

    # -- Clifford conjugation ------------------------------------------------

    def conjugate(self, gate) -> "PauliString":
        """U P U^dagger for gate tuples ('H',q), ('S',q), ('X',q), ('Z',q), ('CNOT',c,t)."""
        kind = gate[0]
        x, z, phase = self.x, self.z, self.phase
        if kind == "CNOT":
            _, c, t = gate
            self._check_qubit(c)
            self._check_qubit(t)
            if c == t:
                raise ValueError("CNOT needs two distinct qubits")
            # X_c -> X_c X_t and Z_t -> Z_c Z_t; no phase in X^x Z^z ordering
            if x >> c & 1:
                x ^= 1 << t
            if z >> t & 1:
                z ^= 1 << c
            return PauliString(self.n, x, z, phase)
        _, q = gate
        self._check_qubit(q)
        xq, zq = x >> q & 1, z >> q & 1
        if kind == "H":
            if xq and zq:
                phase += 2
            x ^= (xq ^ zq) << q
            z ^= (xq ^ zq) << q
        elif kind == "S":
            if xq:
                z ^= 1 << q
                phase += 1
        elif kind == "X":
            phase += 2 * zq
        elif kind == "Z":
            phase += 2 * xq
        else:
            raise ValueError(f"unknown Clifford gate {kind!r}")
        return PauliString(self.n, x, z, phase)

    def conjugate_circuit(self, gates) -> "PauliString":
        p = self
        for g in gates:
            p = p.conjugate(g)
        return p

    def _check_qubit(self, q: int):
        if not 0 <= q < self.n:
            raise ValueError(f"qubit {q} out of range for n={self.n}")

    # -- rendering -----------------------------------------------------------

    def __str__(self) -> str:
        n_y = gf2.weight(self.x & self.z)
        label = _PHASE_LABEL[(self.phase - n_y) & 3]
        terms = []
        for q in gf2.indices_from_mask(self.x | self.z):
            xq, zq = self.x >> q & 1, self.z >> q & 1
            terms.append(("X" if not zq else "Z" if not xq else "Y") + str(q))
        return label + (" ".join(terms) if terms else "I")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    return a * b


def commutes(a: PauliString, b: PauliString) -> bool:
    return a.commutes(b)


def conjugate(p: PauliString, gate) -> PauliString:
    return p.conjugate(gate)


class StabilizerBasis:
    """Row-echelon basis of a stabilizer group for mod-group comparisons."""

    def __init__(self, generators: list[PauliString]):
        if not generators:
            raise ValueError("need at least one generator")
        self.n = generators[0].n
        self.generators = list(generators)
        self._echelon = gf2.RowEchelon(g.symplectic() for g in generators)

    def reduce_mask(self, p: PauliString) -> int:
        return self._echelon.reduce(p.symplectic())

    def contains(self, p: PauliString, up_to_phase: bool = True) -> bool:
        """Membership of p in the group spanned by the generators.

        With up_to_phase=False the exact sign must be reproduced by a product
        of the given (signed) generators.
        """
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        if self._echelon.reduce(p.symplectic()) != 0:
            return False
        if up_to_phase:
            return True
        combo = self._echelon.decompose(p.symplectic(), [g.symplectic() for g in self.generators])
        prod = PauliString.identity(self.n)
        for gi in combo:
            prod = prod * self.generators[gi]
        return prod.phase == p.phase and prod.x == p.x and prod.z == p.z

    def equal_mod_group(self, a: PauliString, b: PauliString) -> bool:
        return self.contains(a * b.inverse(), up_to_phase=True)
