"""Compiled protocol programs and the vectorized Pauli-frame engine.

`compile_program` lowers a scheduled Circuit into a flat list of segments
(split at repeat-until-success boundaries) of steps with per-layer idle
bookkeeping and a global fault-location numbering shared by every engine.

`FrameSimulator` propagates error frames for a whole batch of shots through
the compiled steps with numpy column operations.  It is exact for these
protocols because every classical value the control flow consumes (flag
bits, syndrome parities, decoded logical values) is either deterministic in
the noiseless reference run or an explicitly marked coin; tests cross-check
it against the tableau engine.

`ComboRunner` reuses the same machinery for deterministic fault-injection
(fault-tolerance checking): faults are placed instead of sampled, rejected
blocks restart clean, and error components that anticommute with the
transversal T rotations branch into both outcomes with weight 1/2 each.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import counter_rng as crng
from .circuit import Circuit, MEASURE_KINDS, PREP_KINDS, ROTATION_KINDS
from .noise import OP_CLASS
from .pauli import PauliString

_IDLE_RANK = {"idle_1": 0, "idle_2": 1, "idle_m": 2}


@dataclass
class Step:
    kind: str                     # gate | idle | decode | parity | cond_pauli | assert
    ins: object = None            # originating Instruction for non-idle steps
    loc_index: int = -1           # first fault-location index owned by this step
    noise_class: str | None = None
    idles: tuple = ()             # idle: ((qubit, class), ...)
    layer: int = -1
    t_rot: bool = False           # gate step carrying a transversal-T rotation


@dataclass
class Segment:
    steps: list[Step] = field(default_factory=list)
    rus_id: int | None = None
    prepped_qubits: tuple[int, ...] = ()
    written_bits: tuple[int, ...] = ()


@dataclass
class Program:
    n_qubits: int
    n_bits: int
    segments: list[Segment]
    input_stabilizers: list[PauliString]
    t_as_identity: bool
    rotation_axis: str
    t_qubits: tuple[int, ...]
    n_locations: int
    name: str = ""
    meta: dict = field(default_factory=dict)

    def locations_of_kind(self, pred) -> list[int]:
        out = []
        for seg in self.segments:
            for step in seg.steps:
                if step.kind == "gate" and step.noise_class and pred(step.ins):
                    out.append(step.loc_index)
        return out


def compile_program(circuit: Circuit, *, input_stabilizers=(), t_as_identity=True,
                    rotation_axis="X", name="", meta=None) -> Program:
    circuit.schedule()
    problems = circuit.lint()
    if problems:
        raise ValueError("circuit fails lint: " + "; ".join(problems[:5]))

    # liveness intervals per qubit: birth at first touch or re-prep, death at measure
    intervals: dict[int, list[list[int]]] = {}
    open_iv: dict[int, list[int]] = {}
    for ins in circuit.instructions:
        if not ins.is_quantum():
            continue
        for q in ins.qubits:
            if q not in open_iv:
                open_iv[q] = [ins.layer, ins.layer]
                intervals.setdefault(q, []).append(open_iv[q])
            else:
                open_iv[q][1] = ins.layer
        if ins.kind in MEASURE_KINDS:
            q = ins.qubits[0]
            open_iv[q][1] = ins.layer
            del open_iv[q]
    n_layers = circuit.n_layers()
    for iv in open_iv.values():
        iv[1] = n_layers - 1

    def live_at(q: int, layer: int) -> bool:
        return any(b <= layer <= e for b, e in intervals.get(q, ()))

    # segment boundaries from RUS blocks
    bounds = [0]
    seg_rus: list[int | None] = []
    for k, blk in enumerate(circuit.rus_blocks):
        if blk.start > bounds[-1]:
            seg_rus.append(None)
            bounds.append(blk.start)
        seg_rus.append(k)
        bounds.append(blk.end)
    if bounds[-1] < len(circuit.instructions):
        seg_rus.append(None)
        bounds.append(len(circuit.instructions))

    segments: list[Segment] = []
    loc = 0
    t_qubits: list[int] = []
    for si in range(len(bounds) - 1):
        lo, hi = bounds[si], bounds[si + 1]
        instrs = circuit.instructions[lo:hi]
        quantum = [i for i in instrs if i.is_quantum()]
        classical = [i for i in instrs if not i.is_quantum() and i.kind != "Barrier"]
        seg = Segment(rus_id=seg_rus[si])
        layers = sorted({i.layer for i in quantum})
        for layer in layers:
            acted: set[int] = set()
            classes: set[str] = set()
            for ins in quantum:
                if ins.layer != layer:
                    continue
                is_rot = ins.kind in ROTATION_KINDS
                if is_rot:
                    t_qubits.extend(ins.qubits)
                seg.steps.append(Step("gate", ins, loc, OP_CLASS[ins.kind],
                                      layer=layer, t_rot=is_rot))
                loc += 1
                acted.update(ins.qubits)
                classes.add(OP_CLASS[ins.kind])
            idle_cls = ("idle_m" if "pm" in classes
                        else "idle_2" if "p2" in classes else "idle_1")
            idles = tuple((q, idle_cls) for q in range(circuit.n_qubits)
                          if q not in acted and live_at(q, layer))
            if idles:
                seg.steps.append(Step("idle", None, loc, None, idles, layer=layer))
                loc += len(idles)
        for ins in classical:
            kind = {"DecodeBit": "decode", "ParityBit": "parity",
                    "ConditionalPauli": "cond_pauli", "FlagAssert": "assert"}[ins.kind]
            step = Step(kind, ins)
            if kind == "parity" and ins.coin:
                step.loc_index = loc   # coin draws own a location slot
                loc += 1
            seg.steps.append(step)
        seg.prepped_qubits = tuple(sorted({i.qubits[0] for i in quantum
                                           if i.kind in PREP_KINDS}))
        seg.written_bits = tuple(sorted({i.bit for i in instrs if i.bit is not None
                                         and i.kind != "FlagAssert"}))
        segments.append(seg)

    return Program(
        n_qubits=circuit.n_qubits, n_bits=max(1, circuit.n_bits), segments=segments,
        input_stabilizers=list(input_stabilizers), t_as_identity=t_as_identity,
        rotation_axis=rotation_axis, t_qubits=tuple(sorted(set(t_qubits))),
        n_locations=loc, name=name or circuit.name, meta=meta or {})


# ---------------------------------------------------------------------------
# channel decode tables for vectorized sampling
# ---------------------------------------------------------------------------

# two-qubit Pauli table, same order as noise.TWO_QUBIT_PAULIS
_P2 = np.array([(x0, z0, x1, z1)
                for x0, z0 in ((0, 0), (1, 0), (1, 1), (0, 1))
                for x1, z1 in ((0, 0), (1, 0), (1, 1), (0, 1))][1:], dtype=bool)
_P2X0, _P2Z0, _P2X1, _P2Z1 = _P2[:, 0], _P2[:, 1], _P2[:, 2], _P2[:, 3]


class FrameSimulator:
    """Batched Monte Carlo over Pauli frames.

    Returns per-shot acceptance bookkeeping and the final frames; failure
    adjudication is done by the caller on the output block.
    """

    def __init__(self, program: Program, model, seed: int, rep_cap: int = 10_000):
        if not program.t_as_identity:
            raise ValueError("frame engine runs the Clifford proxy only")
        self.prog = program
        self.model = model
        self.seed = seed
        self.rep_cap = rep_cap
        self._rate_cache: dict[str, float] = {}

    def _rate(self, cls: str) -> float:
        if cls not in self._rate_cache:
            self._rate_cache[cls] = self.model.rate(cls)
        return self._rate_cache[cls]

    def run(self, shot_ids: np.ndarray):
        prog = self.prog
        S = len(shot_ids)
        fx = np.zeros((S, prog.n_qubits), dtype=bool)
        fz = np.zeros_like(fx)
        bits = np.zeros((S, prog.n_bits), dtype=bool)
        n_rus = sum(1 for s in prog.segments if s.rus_id is not None)
        reps = np.zeros((S, max(1, n_rus)), dtype=np.int64)
        capped = np.zeros(S, dtype=bool)

        for si, seg in enumerate(prog.segments):
            if seg.rus_id is None:
                rows = np.nonzero(~capped)[0]
                if len(rows):
                    self._run_segment(seg, si, 0, rows, shot_ids, fx, fz, bits)
            else:
                live = ~capped
                attempt = 0
                while live.any():
                    if attempt >= self.rep_cap:
                        capped |= live
                        break
                    rows = np.nonzero(live)[0]
                    reject = self._run_segment(seg, si, attempt, rows, shot_ids,
                                               fx, fz, bits)
                    reps[rows, seg.rus_id] += 1
                    live[rows] = reject
                    attempt += 1
        return {"fx": fx, "fz": fz, "bits": bits, "reps": reps, "capped": capped}

    # one pass over a segment for the given rows; returns per-row reject mask
    def _run_segment(self, seg, si, attempt, rows, shot_ids, fx, fz, bits):
        base = crng.shot_keys(self.seed, shot_ids[rows], si, attempt)
        reject = np.zeros(len(rows), dtype=bool)
        for step in seg.steps:
            k = step.kind
            if k == "gate":
                self._gate(step, base, rows, fx, fz, bits)
            elif k == "idle":
                self._idle(step, base, rows, fx, fz)
            elif k == "decode":
                _decode_step(step.ins, rows, bits)
            elif k == "parity":
                ins = step.ins
                acc = np.zeros(len(rows), dtype=bool)
                for b in ins.parity_src:
                    acc ^= bits[rows, b]
                if ins.coin:
                    acc ^= crng.uniforms(base, step.loc_index) < 0.5
                bits[rows, ins.bit] = acc
            elif k == "cond_pauli":
                ins = step.ins
                cond_bits, const = ins.condition
                fire = np.zeros(len(rows), dtype=bool)
                for b in cond_bits:
                    fire ^= bits[rows, b]
                if const:
                    fire = ~fire
                sel = rows[fire]
                if len(sel):
                    if ins.pauli_x:
                        fx[np.ix_(sel, list(ins.pauli_x))] ^= True
                    if ins.pauli_z:
                        fz[np.ix_(sel, list(ins.pauli_z))] ^= True
            elif k == "assert":
                reject |= bits[rows, step.ins.bit] != bool(step.ins.expected)
        return reject

    def _gate(self, step, base, rows, fx, fz, bits):
        ins = step.ins
        kind = ins.kind
        if kind == "CNOT":
            c, t = ins.qubits
            fx[rows, t] ^= fx[rows, c]
            fz[rows, c] ^= fz[rows, t]
            self._inject(step, base, rows, fx, fz)
        elif kind in ("PrepZ", "PrepX"):
            q = ins.qubits[0]
            fx[rows, q] = False
            fz[rows, q] = False
            self._inject(step, base, rows, fx, fz)
        elif kind in ("MeasureZ", "MeasureX"):
            q = ins.qubits[0]
            self._inject(step, base, rows, fx, fz)  # fault before measurement
            flip = fx[rows, q] if kind == "MeasureZ" else fz[rows, q]
            bits[rows, ins.bit] = flip
            fx[rows, q] = False
            fz[rows, q] = False
        elif kind == "H":
            q = ins.qubits[0]
            tmp = fx[rows, q].copy()
            fx[rows, q] = fz[rows, q]
            fz[rows, q] = tmp
            self._inject(step, base, rows, fx, fz)
        elif kind == "S":
            q = ins.qubits[0]
            fz[rows, q] ^= fx[rows, q]
            self._inject(step, base, rows, fx, fz)
        else:  # X, Z, RX, RZ: identity on frames
            self._inject(step, base, rows, fx, fz)

    def _inject(self, step, base, rows, fx, fz):
        p = self._rate(step.noise_class)
        if p == 0.0:
            return
        u = crng.uniforms(base, step.loc_index)
        hit = u < p
        if not hit.any():
            return
        if len(step.ins.qubits) == 1:
            q = step.ins.qubits[0]
            kind3 = np.minimum((u * (3.0 / p)).astype(np.int8), 2)
            fx[rows, q] ^= hit & (kind3 <= 1)
            fz[rows, q] ^= hit & (kind3 >= 1)
        else:
            a, b = step.ins.qubits
            k15 = np.minimum((u * (15.0 / p)).astype(np.int64), 14)
            fx[rows, a] ^= hit & _P2X0[k15]
            fz[rows, a] ^= hit & _P2Z0[k15]
            fx[rows, b] ^= hit & _P2X1[k15]
            fz[rows, b] ^= hit & _P2Z1[k15]

    def _idle(self, step, base, rows, fx, fz):
        if self.model.variant != "multi_param" or not self.model.has_idle():
            return
        qs = [q for q, _ in step.idles]
        rates = np.array([self._rate(cls) for _, cls in step.idles])
        if not rates.any():
            return
        u = crng.uniform_block(base, step.loc_index, len(qs))  # (nq, rows)
        flips = u < rates[:, None]
        fz[np.ix_(rows, qs)] ^= flips.T


# decode tables are provided by the decoder module; cached per (code, basis)
_DECODE_CACHE: dict = {}


def _decode_tables(code_name: str, basis: str):
    key = (code_name, basis)
    if key not in _DECODE_CACHE:
        from .codes import build_code
        from .decoder import get_lookup
        code = build_code(code_name)
        stabs = code.x_stabilizers if basis == "X" else code.z_stabilizers
        logical = code.logical_x if basis == "X" else code.logical_z
        mat = np.zeros((len(stabs), code.n), dtype=np.uint8)
        for j, s in enumerate(stabs):
            mat[j, list(s)] = 1
        table = get_lookup(code_name, "Z" if basis == "X" else "X")
        _DECODE_CACHE[key] = (mat, np.array(sorted(logical)), table.logical_flip_array())
    return _DECODE_CACHE[key]


def _decode_step(ins, rows, bits):
    bit_idx, code_name, basis = ins.decode
    mat, logical_cols, corr_flip = _decode_tables(code_name, basis)
    flips = bits[np.ix_(rows, list(bit_idx))].astype(np.uint8)
    synd = (flips @ mat.T) & 1
    synd_int = synd.astype(np.int64) @ (1 << np.arange(mat.shape[0], dtype=np.int64))
    raw = flips[:, logical_cols].sum(axis=1) & 1
    bits[rows, ins.bit] = (raw ^ corr_flip[synd_int]).astype(bool)


# ---------------------------------------------------------------------------
# deterministic fault-injection runner for FT checking
# ---------------------------------------------------------------------------

@dataclass
class BranchBatch:
    """Rows = branches of fault combos; weights sum to 1 within each combo."""
    combo_id: np.ndarray
    weight: np.ndarray
    fx: np.ndarray
    fz: np.ndarray
    bits: np.ndarray
    rejected_clean: np.ndarray  # combo rows that restarted some block cleanly


class ComboRunner:
    """Runs a batch of fixed fault combos through the program.

    Faults fire the first time their location executes; a rejected RUS block
    restarts noiselessly, which resets the block's frames and readout bits.
    At the transversal T rotations, any frame component anticommuting with
    the rotation axis splits the row into both branches with half weight.
    """

    def __init__(self, program: Program, combos: list[list[tuple[int, tuple[int, int, int, int] | tuple]]]):
        # each combo: list of (loc_index, per-qubit (xz flags aligned to the
        # location's qubits)) built by ftcheck
        self.prog = program
        self.combos = combos
        self._branched = False

    def run(self) -> BranchBatch:
        self._branched = False
        prog = self.prog
        n = prog.n_qubits
        C = len(self.combos)
        combo_id = np.arange(C, dtype=np.int64)
        weight = np.ones(C)
        fx = np.zeros((C, n), dtype=bool)
        fz = np.zeros_like(fx)
        bits = np.zeros((C, prog.n_bits), dtype=bool)
        restarted = np.zeros(C, dtype=bool)

        # location -> list of (combo index, flags)
        by_loc: dict[int, list[tuple[int, tuple]]] = {}
        for ci, combo in enumerate(self.combos):
            for loc, flags in combo:
                by_loc.setdefault(loc, []).append((ci, flags))

        axis = prog.rotation_axis
        for seg in prog.segments:
            reject = np.zeros(len(combo_id), dtype=bool)
            for step in seg.steps:
                k = step.kind
                if k == "gate":
                    ins = step.ins
                    fx, fz, bits, combo_id, weight, restarted, reject = self._maybe_branch(
                        step, axis, fx, fz, bits, combo_id, weight, restarted, reject)
                    _apply_gate_rows(ins, fx, fz)
                    self._inject_fixed(step, by_loc, combo_id, fx, fz, ins)
                    if ins.kind in MEASURE_KINDS:
                        q = ins.qubits[0]
                        flip = fx[:, q] if ins.kind == "MeasureZ" else fz[:, q]
                        bits[:, ins.bit] = flip
                        fx[:, q] = False
                        fz[:, q] = False
                elif k == "decode":
                    _decode_step_all(step.ins, bits)
                elif k == "parity":
                    ins = step.ins
                    acc = np.zeros(len(combo_id), dtype=bool)
                    for b in ins.parity_src:
                        acc ^= bits[:, b]
                    # coins resolve to the accepting value: extra rejection is
                    # error-independent, so it cannot hide a failing branch
                    bits[:, ins.bit] = acc
                elif k == "cond_pauli":
                    ins = step.ins
                    cond_bits, const = ins.condition
                    fire = np.zeros(len(combo_id), dtype=bool)
                    for b in cond_bits:
                        fire ^= bits[:, b]
                    if const:
                        fire = ~fire
                    if fire.any():
                        if ins.pauli_x:
                            fx[np.ix_(fire, list(ins.pauli_x))] ^= True
                        if ins.pauli_z:
                            fz[np.ix_(fire, list(ins.pauli_z))] ^= True
                elif k == "assert":
                    reject |= bits[:, step.ins.bit] != bool(step.ins.expected)
            if seg.rus_id is not None and reject.any():
                # clean restart: frames and readouts of the block reset
                if seg.prepped_qubits:
                    fx[np.ix_(reject, list(seg.prepped_qubits))] = False
                    fz[np.ix_(reject, list(seg.prepped_qubits))] = False
                if seg.written_bits:
                    bits[np.ix_(reject, list(seg.written_bits))] = False
                restarted |= reject
        return BranchBatch(combo_id, weight, fx, fz, bits, restarted)

    def _inject_fixed(self, step, by_loc, combo_id, fx, fz, ins):
        # faults are applied after gates/preps and before measurements; the
        # measurement case works because _inject_fixed runs before readout
        entries = by_loc.get(step.loc_index)
        if not entries:
            return
        for ci, flags in entries:
            if self._branched:
                rows = np.nonzero(combo_id == ci)[0]
            else:
                rows = (ci,)  # one row per combo until the first branch point
            for r in rows:
                for (q, (xb, zb)) in zip(ins.qubits, flags):
                    if xb:
                        fx[r, q] ^= True
                    if zb:
                        fz[r, q] ^= True

    def _maybe_branch(self, step, axis, fx, fz, bits, combo_id, weight, restarted, reject):
        if not step.t_rot:
            return fx, fz, bits, combo_id, weight, restarted, reject
        q = step.ins.qubits[0]
        comp = fz[:, q] if axis == "X" else fx[:, q]
        split = np.nonzero(comp)[0]
        if len(split) == 0:
            return fx, fz, bits, combo_id, weight, restarted, reject
        # duplicate split rows with half weight each; the copy becomes Y
        self._branched = True
        dup = np.concatenate([np.arange(len(combo_id)), split])
        fx, fz, bits = fx[dup].copy(), fz[dup].copy(), bits[dup].copy()
        combo_id = combo_id[dup]
        weight = weight[dup].copy()
        restarted = restarted[dup]
        reject = reject[dup]
        new_rows = np.arange(len(dup) - len(split), len(dup))
        weight[split] *= 0.5
        weight[new_rows] *= 0.5
        if axis == "X":
            fx[new_rows, q] ^= True   # Z component becomes Y
        else:
            fz[new_rows, q] ^= True   # X component becomes Y
        return fx, fz, bits, combo_id, weight, restarted, reject


def _apply_gate_rows(ins, fx, fz):
    kind = ins.kind
    if kind == "CNOT":
        c, t = ins.qubits
        fx[:, t] ^= fx[:, c]
        fz[:, c] ^= fz[:, t]
    elif kind in ("PrepZ", "PrepX"):
        q = ins.qubits[0]
        fx[:, q] = False
        fz[:, q] = False
    elif kind == "H":
        q = ins.qubits[0]
        tmp = fx[:, q].copy()
        fx[:, q] = fz[:, q]
        fz[:, q] = tmp
    elif kind == "S":
        q = ins.qubits[0]
        fz[:, q] ^= fx[:, q]
    # X, Z, rotations, measurements: nothing here (measurement readout is
    # handled by the caller after fault injection)


def _decode_step_all(ins, bits):
    bit_idx, code_name, basis = ins.decode
    mat, logical_cols, corr_flip = _decode_tables(code_name, basis)
    flips = bits[:, list(bit_idx)].astype(np.uint8)
    synd = (flips @ mat.T) & 1
    synd_int = synd.astype(np.int64) @ (1 << np.arange(mat.shape[0], dtype=np.int64))
    raw = flips[:, logical_cols].sum(axis=1) & 1
    bits[:, ins.bit] = (raw ^ corr_flip[synd_int]).astype(bool)
