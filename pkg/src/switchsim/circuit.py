"""Time-layered circuit IR with classical feed-forward and RUS blocks.

Instruction kinds:

* quantum: PrepZ, PrepX, H, S, X, Z, CNOT, RX/RZ (angle a multiple of pi/4),
  MeasureZ, MeasureX
* classical: DecodeBit (lookup-decoded logical value of a transversal
  readout), ConditionalPauli (Pauli applied when a classical parity fires),
  FlagAssert (accept/abort test inside a repeat-until-success block)

Quantum instructions receive time layers from an as-soon-as-possible
scheduler; classical instructions take no time.  Feed-forward Paulis are
frame updates by default (engines may opt into applying them as noisy
physical gates).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

QUANTUM_KINDS = ("PrepZ", "PrepX", "H", "S", "X", "Z", "CNOT", "RX", "RZ",
                 "MeasureZ", "MeasureX")
SINGLE_QUBIT_KINDS = ("PrepZ", "PrepX", "H", "S", "X", "Z", "RX", "RZ",
                      "MeasureZ", "MeasureX")
CLASSICAL_KINDS = ("DecodeBit", "ParityBit", "ConditionalPauli", "FlagAssert", "Barrier")
MEASURE_KINDS = ("MeasureZ", "MeasureX")
PREP_KINDS = ("PrepZ", "PrepX")
ROTATION_KINDS = ("RX", "RZ")


@dataclass(frozen=True)
class Instruction:
    kind: str
    qubits: tuple[int, ...] = ()
    bit: int | None = None          # classical target (measurements, DecodeBit)
    angle: int = 0                  # rotation angle in units of pi/4
    # ConditionalPauli: pauli support + condition (bit list, const); fires when
    # XOR(bits) ^ const == 1
    pauli_x: tuple[int, ...] = ()
    pauli_z: tuple[int, ...] = ()
    condition: tuple[tuple[int, ...], int] | None = None
    # DecodeBit: transversal readout decoding spec
    decode: tuple[tuple[int, ...], str, str] | None = None  # (bits, code, basis)
    # ParityBit: XOR of source bits into `bit`; coin marks a readout parity
    # that is uniformly random in the noiseless reference run
    parity_src: tuple[int, ...] = ()
    coin: bool = False
    expected: int = 0               # FlagAssert expected bit value
    layer: int = -1

    def is_quantum(self) -> bool:
        return self.kind in QUANTUM_KINDS


@dataclass(frozen=True)
class RusBlock:
    start: int   # instruction index, inclusive
    end: int     # exclusive
    abort: str = "any-flag-assert-fails"


@dataclass
class Circuit:
    n_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    rus_blocks: list[RusBlock] = field(default_factory=list)
    t_layer_span: tuple[int, int] | None = None  # rotations legal only here
    name: str = ""

    # -- construction helpers ------------------------------------------------

    def add(self, kind: str, qubits=(), **kw) -> int:
        if isinstance(qubits, int):
            qubits = (qubits,)
        self.instructions.append(Instruction(kind, tuple(qubits), **kw))
        return len(self.instructions) - 1

    def cnot(self, c: int, t: int):
        self.add("CNOT", (c, t))

    def measure(self, q: int, basis: str, bit: int):
        self.add("MeasureZ" if basis == "Z" else "MeasureX", (q,), bit=bit)

    @property
    def n_bits(self) -> int:
        bits = [i.bit for i in self.instructions if i.bit is not None]
        return max(bits) + 1 if bits else 0

    def cnot_count(self) -> int:
        return sum(1 for i in self.instructions if i.kind == "CNOT")

    def count_kind(self, kind: str) -> int:
        return sum(1 for i in self.instructions if i.kind == kind)

    # -- scheduling ------------------------------------------------------------

    def schedule(self) -> "Circuit":
        """Assign ASAP layers in instruction order; classical ops take no time."""
        free = [0] * self.n_qubits
        out = []
        for ins in self.instructions:
            if ins.kind == "Barrier":
                top = max(free, default=0)
                free = [top] * self.n_qubits
                out.append(replace(ins, layer=-1))
            elif ins.is_quantum():
                start = max((free[q] for q in ins.qubits), default=0)
                for q in ins.qubits:
                    free[q] = start + 1
                out.append(replace(ins, layer=start))
            else:
                out.append(replace(ins, layer=-1))
        self.instructions = out
        return self

    def n_layers(self) -> int:
        return 1 + max((i.layer for i in self.instructions if i.layer >= 0), default=-1)

    def max_live_qubits(self) -> int:
        """Peak number of qubits simultaneously live (first touch until
        measurement) across layers."""
        if any(i.layer < 0 for i in self.instructions if i.is_quantum()):
            self.schedule()
        intervals: list[tuple[int, int]] = []
        alive_from: dict[int, int] = {}
        for ins in self.instructions:
            if not ins.is_quantum():
                continue
            for q in ins.qubits:
                alive_from.setdefault(q, ins.layer)
            if ins.kind in MEASURE_KINDS:
                q = ins.qubits[0]
                intervals.append((alive_from.pop(q, ins.layer), ins.layer))
        last = self.n_layers() - 1
        intervals.extend((b, last) for b in alive_from.values())
        peak = 0
        for layer in range(self.n_layers()):
            peak = max(peak, sum(1 for b, e in intervals if b <= layer <= e))
        return peak

    # -- validation --------------------------------------------------------------

    def lint(self) -> list[str]:
        problems: list[str] = []
        if any(i.layer < 0 for i in self.instructions if i.is_quantum()):
            self.schedule()
        seen_bits: set[int] = set()
        per_layer: dict[int, set[int]] = {}
        for idx, ins in enumerate(self.instructions):
            if ins.kind not in QUANTUM_KINDS + CLASSICAL_KINDS:
                problems.append(f"[{idx}] unknown kind {ins.kind}")
                continue
            if ins.kind == "CNOT":
                if len(ins.qubits) != 2 or ins.qubits[0] == ins.qubits[1]:
                    problems.append(f"[{idx}] CNOT needs 2 distinct qubits")
            elif ins.kind in SINGLE_QUBIT_KINDS and len(ins.qubits) != 1:
                problems.append(f"[{idx}] {ins.kind} needs exactly 1 qubit")
            for q in ins.qubits:
                if not 0 <= q < self.n_qubits:
                    problems.append(f"[{idx}] qubit {q} out of range")
            if ins.is_quantum():
                used = per_layer.setdefault(ins.layer, set())
                if used & set(ins.qubits):
                    problems.append(f"[{idx}] layer {ins.layer} reuses a qubit")
                used.update(ins.qubits)
            if ins.kind in MEASURE_KINDS or ins.kind in ("DecodeBit", "ParityBit"):
                if ins.bit is None:
                    problems.append(f"[{idx}] {ins.kind} needs a classical target")
            refs = ()
            if ins.kind == "ConditionalPauli" and ins.condition is not None:
                refs = ins.condition[0]
            if ins.kind == "DecodeBit":
                refs = ins.decode[0]
            if ins.kind == "ParityBit":
                refs = ins.parity_src
            if ins.kind == "FlagAssert":
                refs = (ins.bit,)
            for b in refs:
                if b not in seen_bits:
                    problems.append(f"[{idx}] {ins.kind} references unwritten bit {b}")
            if ins.bit is not None and ins.kind != "FlagAssert":
                seen_bits.add(ins.bit)
            if ins.kind in ROTATION_KINDS:
                if self.t_layer_span is None or not (self.t_layer_span[0] <= idx < self.t_layer_span[1]):
                    problems.append(f"[{idx}] rotation outside the transversal T region")
        # RUS block structure
        prev_end = 0
        for blk in self.rus_blocks:
            if not (0 <= blk.start < blk.end <= len(self.instructions)):
                problems.append(f"rus block {blk} out of range")
            if blk.start < prev_end:
                problems.append(f"rus block {blk} overlaps previous block")
            prev_end = blk.end
        for idx, ins in enumerate(self.instructions):
            if ins.kind == "FlagAssert":
                owners = [b for b in self.rus_blocks if b.start <= idx < b.end]
                if len(owners) != 1:
                    problems.append(f"[{idx}] FlagAssert inside {len(owners)} rus blocks")
        return problems

    # -- composition ---------------------------------------------------------------

    def append_circuit(self, other: "Circuit", qubit_map: dict[int, int],
                       bit_offset: int = 0) -> tuple[int, int]:
        """Inline other with remapped qubits/bits; returns its index span."""
        start = len(self.instructions)
        for ins in other.instructions:
            kw = {}
            if ins.bit is not None:
                kw["bit"] = ins.bit + bit_offset
            if ins.angle:
                kw["angle"] = ins.angle
            if ins.pauli_x or ins.pauli_z:
                kw["pauli_x"] = tuple(qubit_map[q] for q in ins.pauli_x)
                kw["pauli_z"] = tuple(qubit_map[q] for q in ins.pauli_z)
            if ins.condition is not None:
                bits, const = ins.condition
                kw["condition"] = (tuple(b + bit_offset for b in bits), const)
            if ins.decode is not None:
                bits, code, basis = ins.decode
                kw["decode"] = (tuple(b + bit_offset for b in bits), code, basis)
            if ins.parity_src:
                kw["parity_src"] = tuple(b + bit_offset for b in ins.parity_src)
            if ins.coin:
                kw["coin"] = True
            if ins.expected:
                kw["expected"] = ins.expected
            self.instructions.append(
                Instruction(ins.kind, tuple(qubit_map[q] for q in ins.qubits), **kw))
        end = len(self.instructions)
        for blk in other.rus_blocks:
            self.rus_blocks.append(RusBlock(blk.start + start, blk.end + start, blk.abort))
        if other.t_layer_span is not None:
            self.t_layer_span = (other.t_layer_span[0] + start, other.t_layer_span[1] + start)
        return start, end

    # -- serialization ---------------------------------------------------------------

    def to_json_dict(self) -> dict:
        def enc(ins: Instruction) -> dict:
            d: dict = {"kind": ins.kind, "qubits": list(ins.qubits), "layer": ins.layer}
            if ins.bit is not None:
                d["bit"] = ins.bit
            if ins.angle:
                d["angle"] = ins.angle
            if ins.pauli_x or ins.pauli_z:
                d["pauli_x"], d["pauli_z"] = list(ins.pauli_x), list(ins.pauli_z)
            if ins.condition is not None:
                d["condition"] = {"bits": list(ins.condition[0]), "const": ins.condition[1]}
            if ins.decode is not None:
                d["decode"] = {"bits": list(ins.decode[0]), "code": ins.decode[1],
                               "basis": ins.decode[2]}
            if ins.parity_src:
                d["parity_src"] = list(ins.parity_src)
            if ins.coin:
                d["coin"] = True
            if ins.kind == "FlagAssert":
                d["expected"] = ins.expected
            return d

        return {
            "schema": "switchsim-circuit-v1",
            "name": self.name,
            "n_qubits": self.n_qubits,
            "n_bits": self.n_bits,
            "instructions": [enc(i) for i in self.instructions],
            "rus_blocks": [{"start": b.start, "end": b.end, "abort": b.abort}
                           for b in self.rus_blocks],
            "t_layer_span": list(self.t_layer_span) if self.t_layer_span else None,
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)

    @staticmethod
    def from_json_dict(d: dict) -> "Circuit":
        c = Circuit(d["n_qubits"], name=d.get("name", ""))
        for e in d["instructions"]:
            kw = {}
            if "bit" in e:
                kw["bit"] = e["bit"]
            if e.get("angle"):
                kw["angle"] = e["angle"]
            if "pauli_x" in e:
                kw["pauli_x"] = tuple(e["pauli_x"])
                kw["pauli_z"] = tuple(e["pauli_z"])
            if "condition" in e:
                kw["condition"] = (tuple(e["condition"]["bits"]), e["condition"]["const"])
            if "decode" in e:
                kw["decode"] = (tuple(e["decode"]["bits"]), e["decode"]["code"],
                                e["decode"]["basis"])
            if "parity_src" in e:
                kw["parity_src"] = tuple(e["parity_src"])
            if e.get("coin"):
                kw["coin"] = True
            if "expected" in e:
                kw["expected"] = e["expected"]
            c.add(e["kind"], tuple(e["qubits"]), **kw)
        c.rus_blocks = [RusBlock(b["start"], b["end"], b.get("abort", "any-flag-assert-fails"))
                        for b in d.get("rus_blocks", [])]
        if d.get("t_layer_span"):
            c.t_layer_span = tuple(d["t_layer_span"])
        return c.schedule()
