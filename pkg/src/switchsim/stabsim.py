"""CHP-style stabilizer tableau engine.

Rows are exact-phase PauliStrings, so measurement signs are deterministic
where the stabilizer group fixes them.  One Tableau per shot; this engine is
the correctness reference — bulk Monte Carlo runs use the compiled Pauli-frame
engine in :mod:`switchsim.frame`, which is cross-checked against this one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .pauli import PauliString


class Tableau:
    """Stabilizer + destabilizer tableau over n qubits, initialized to |0..0>."""

    def __init__(self, n: int):
        self.n = n
        self.destab = [PauliString.single(n, q, "X") for q in range(n)]
        self.stab = [PauliString.single(n, q, "Z") for q in range(n)]

    # -- gates ---------------------------------------------------------------

    def apply_gate(self, gate):
        self.destab = [p.conjugate(gate) for p in self.destab]
        self.stab = [p.conjugate(gate) for p in self.stab]

    def apply_pauli(self, p: PauliString):
        """Apply a Pauli to the state: flips signs of anticommuting rows."""
        for rows in (self.destab, self.stab):
            for i, r in enumerate(rows):
                if not r.commutes(p):
                    rows[i] = PauliString(r.n, r.x, r.z, r.phase + 2)

    # -- measurement -----------------------------------------------------------

    def _sign_of(self, p: PauliString) -> int | None:
        """0/1 sign exponent of +-p in the stabilizer group, None if random."""
        acc = PauliString.identity(self.n)
        for i in range(self.n):
            if not self.stab[i].commutes(p):
                return None
            if not self.destab[i].commutes(p):
                acc = acc * self.stab[i]
        if acc.x != p.x or acc.z != p.z:
            raise AssertionError("tableau inconsistent with measured operator")
        return ((acc.phase - p.phase) & 3) // 2

    def expectation(self, p: PauliString) -> int | None:
        """+1/-1 if p is fixed by the state, else None; no collapse."""
        s = self._sign_of(p)
        return None if s is None else (1 if s == 0 else -1)

    def measure_pauli(self, p: PauliString, rng=None, force: int | None = None) -> int:
        """Projective measurement of a Hermitian Pauli; returns the outcome bit.

        Random outcomes use rng.integers(2) unless `force` picks the branch.
        """
        pivot = None
        for i in range(self.n):
            if not self.stab[i].commutes(p):
                pivot = i
                break
        if pivot is None:
            s = self._sign_of(p)
            return s
        m = force if force is not None else int(rng.integers(2))
        old = self.stab[pivot]
        for rows in (self.destab, self.stab):
            for i, r in enumerate(rows):
                if (rows is self.stab and i == pivot) or (rows is self.destab and i == pivot):
                    continue
                if not r.commutes(p):
                    rows[i] = r * old
        self.destab[pivot] = old
        self.stab[pivot] = PauliString(p.n, p.x, p.z, p.phase + 2 * m)
        return m

    def measure_qubit(self, q: int, basis: str, rng=None, force=None) -> int:
        return self.measure_pauli(PauliString.single(self.n, q, basis), rng, force)

    def reset_qubit(self, q: int, basis: str, rng=None):
        m = self.measure_qubit(q, basis, rng)
        if m:
            flip = "X" if basis == "Z" else "Z"
            self.apply_pauli(PauliString.single(self.n, q, flip))

    # -- state preparation -------------------------------------------------------

    def prepare_stabilizer_state(self, stabilizers: list[PauliString]):
        """Force the sub-state stabilized by the given signed commuting Paulis.

        Used for noiseless logical input states: measure each operator and fix
        the sign, which leaves untouched qubits alone.
        """
        forced: set[int] = set()
        for s in stabilizers:
            if not s.is_hermitian():
                raise ValueError(f"non-Hermitian stabilizer {s}")
            pivot = None
            for i in range(self.n):
                if not self.stab[i].commutes(s):
                    pivot = i
                    break
            if pivot is not None:
                self.measure_pauli(s, force=0)
                forced.add(pivot)
            else:
                if self._sign_of(s) == 1:
                    # flip via a destabilizer of an unforced contributing row
                    fixed = False
                    for i in range(self.n):
                        if i in forced:
                            continue
                        if not self.destab[i].commutes(s):
                            self.apply_pauli(self.destab[i])
                            fixed = True
                            break
                    if not fixed:
                        raise ValueError("inconsistent stabilizer list")

    def stabilizer_signs(self, paulis: list[PauliString]) -> list[int | None]:
        return [self.expectation(p) for p in paulis]


@dataclass
class ShotResult:
    accepted: bool
    repetitions: dict[int, int] = field(default_factory=dict)  # rus block id -> attempts
    logical_failure: bool = False
    bits: list[int] = field(default_factory=list)
    terminated: bool = True


class TableauRunner:
    """Executes a compiled schedule (see frame.compile_program) on a Tableau.

    `fault_source(loc_key, arity)` returns an (x_mask, z_mask) fault to inject
    at a location, or None.  Location keys match the frame engine's.
    """

    def __init__(self, program, rng, fault_source=None, rep_cap: int = 10_000):
        self.prog = program
        self.rng = rng
        self.fault_source = fault_source
        self.rep_cap = rep_cap
        self.tab = Tableau(program.n_qubits)
        self.bits = [0] * max(1, program.n_bits)
        if program.input_stabilizers:
            self.tab.prepare_stabilizer_state(program.input_stabilizers)

    def _inject(self, key, qubits):
        if self.fault_source is None:
            return
        fault = self.fault_source(key, qubits)
        if fault is None:
            return
        x, z = fault
        if x or z:
            self.tab.apply_pauli(PauliString(self.prog.n_qubits, x, z))

    def run(self) -> ShotResult:
        res = ShotResult(accepted=True)
        for seg in self.prog.segments:
            attempts = 0
            while True:
                attempts += 1
                ok = self._run_segment(seg, attempt=attempts - 1)
                if ok:
                    break
                if attempts >= self.rep_cap:
                    res.terminated = False
                    res.accepted = False
                    if seg.rus_id is not None:
                        res.repetitions[seg.rus_id] = attempts
                    res.bits = self.bits
                    return res
            if seg.rus_id is not None:
                res.repetitions[seg.rus_id] = attempts
        res.bits = self.bits
        return res

    def _run_segment(self, seg, attempt: int) -> bool:
        from .decoder import get_lookup  # local import to avoid a cycle

        n = self.prog.n_qubits
        for step in seg.steps:
            kind = step.kind
            if kind == "gate":
                ins = step.ins
                if ins.kind in ("PrepZ", "PrepX"):
                    self.tab.reset_qubit(ins.qubits[0], "Z" if ins.kind == "PrepZ" else "X",
                                         self.rng)
                    self._inject(("op", step.loc_index, attempt), ins.qubits)
                elif ins.kind in ("H", "S", "X", "Z"):
                    self.tab.apply_gate((ins.kind, ins.qubits[0]))
                    self._inject(("op", step.loc_index, attempt), ins.qubits)
                elif ins.kind == "CNOT":
                    self.tab.apply_gate(("CNOT", *ins.qubits))
                    self._inject(("op", step.loc_index, attempt), ins.qubits)
                elif ins.kind in ("RX", "RZ"):
                    if not self.prog.t_as_identity:
                        raise ValueError("stabilizer engine cannot apply a T rotation; "
                                         "compile with the Clifford proxy")
                    self._inject(("op", step.loc_index, attempt), ins.qubits)
                elif ins.kind in ("MeasureZ", "MeasureX"):
                    self._inject(("op", step.loc_index, attempt), ins.qubits)
                    m = self.tab.measure_qubit(ins.qubits[0],
                                               "Z" if ins.kind == "MeasureZ" else "X", self.rng)
                    self.bits[ins.bit] = m
                else:
                    raise ValueError(f"unexpected gate {ins.kind}")
            elif kind == "idle":
                for off, (q, _cls) in enumerate(step.idles):
                    self._inject(("idle", step.loc_index + off, attempt), (q,))
            elif kind == "decode":
                bits_idx, code, basis = step.ins.decode
                readout = [self.bits[b] for b in bits_idx]
                table = get_lookup(code, "Z" if basis == "X" else "X")
                val, _, _ = table.decode_readout(readout)
                self.bits[step.ins.bit] = val
            elif kind == "cond_pauli":
                ins = step.ins
                bits, const = ins.condition
                if self._parity(bits) ^ const:
                    x = sum(1 << q for q in ins.pauli_x)
                    z = sum(1 << q for q in ins.pauli_z)
                    self.tab.apply_pauli(PauliString(n, x, z))
            elif kind == "assert":
                ins = step.ins
                if self.bits[ins.bit] != ins.expected:
                    return False
            else:
                raise ValueError(f"unknown step kind {kind}")
        return True

    def _parity(self, bits) -> int:
        acc = 0
        for b in bits:
            acc ^= self.bits[b]
        return acc
