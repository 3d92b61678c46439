"""Circuit-level Pauli noise models and fault-location bookkeeping.

Two variants:

* single_param(p): depolarizing channel after every 1-qubit gate and
  initialization and before every measurement (each of X, Y, Z with p/3);
  after every CNOT one of the 15 non-identity two-qubit Paulis with p/15
  each.  No idling noise.
* multi_param: separate depolarizing rates for 1q gates (p1), CNOTs (p2),
  initializations (pi) and measurements (pm), plus pure-Z dephasing on idling
  qubits with a rate class set by the slowest operation in the layer
  (p_idle_1 / p_idle_2 / p_idle_m).  `collapse_idle` forces one common idle
  rate, which is how the entangling-gate scans are run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# noise class of each operation kind
OP_CLASS = {
    "PrepZ": "pi", "PrepX": "pi",
    "H": "p1", "S": "p1", "X": "p1", "Z": "p1", "RX": "p1", "RZ": "p1",
    "CNOT": "p2",
    "MeasureZ": "pm", "MeasureX": "pm",
}
IDLE_CLASSES = ("idle_1", "idle_2", "idle_m")


@dataclass(frozen=True)
class NoiseModel:
    variant: str  # "single_param" | "multi_param"
    p: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    pi: float = 0.0
    pm: float = 0.0
    p_idle_1: float = 0.0
    p_idle_2: float = 0.0
    p_idle_m: float = 0.0
    collapse_idle: bool = False
    p_idle: float = 0.0  # used when collapse_idle
    name: str = ""

    def __post_init__(self):
        for f in ("p", "p1", "p2", "pi", "pm", "p_idle_1", "p_idle_2", "p_idle_m", "p_idle"):
            v = getattr(self, f)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{f}={v} outside [0,1]")
        if self.variant not in ("single_param", "multi_param"):
            raise ValueError(f"unknown noise variant {self.variant!r}")

    def rate(self, noise_class: str) -> float:
        if self.variant == "single_param":
            if noise_class in ("p1", "p2", "pi", "pm"):
                return self.p
            return 0.0
        if noise_class in ("p1", "p2", "pi", "pm"):
            return getattr(self, noise_class)
        if noise_class.startswith("idle"):
            if self.collapse_idle:
                return self.p_idle
            return {"idle_1": self.p_idle_1, "idle_2": self.p_idle_2,
                    "idle_m": self.p_idle_m}[noise_class]
        raise KeyError(noise_class)

    def has_idle(self) -> bool:
        return self.variant == "multi_param" and (
            self.collapse_idle and self.p_idle > 0
            or not self.collapse_idle and (self.p_idle_1 > 0 or self.p_idle_2 > 0
                                           or self.p_idle_m > 0))

    def describe(self) -> dict:
        d = {"variant": self.variant}
        if self.variant == "single_param":
            d["p"] = self.p
        else:
            d.update(p1=self.p1, p2=self.p2, pi=self.pi, pm=self.pm)
            if self.collapse_idle:
                d["p_idle"] = self.p_idle
            else:
                d.update(p_idle_1=self.p_idle_1, p_idle_2=self.p_idle_2,
                         p_idle_m=self.p_idle_m)
        if self.name:
            d["name"] = self.name
        return d


def single_param(p: float) -> NoiseModel:
    return NoiseModel("single_param", p=p, name=f"single_param(p={p:g})")


def multi_param(p1, p2, pi, pm, p_idle_1=0.0, p_idle_2=0.0, p_idle_m=0.0,
                collapse_idle=False, p_idle=0.0, name="") -> NoiseModel:
    return NoiseModel("multi_param", p1=p1, p2=p2, pi=pi, pm=pm,
                      p_idle_1=p_idle_1, p_idle_2=p_idle_2, p_idle_m=p_idle_m,
                      collapse_idle=collapse_idle, p_idle=p_idle, name=name)


def derive_idle_rate(t: float, t2: float) -> float:
    """Dephasing probability for idling time t with coherence time T2."""
    if t <= 0 or t2 <= 0:
        raise ValueError("times must be positive")
    return (1.0 - math.exp(-t / t2)) / 2.0


# Ion-trap rate sets: operation times t1=15us, t2=200us, tm=300us at
# T2=100ms for the high set; t1=15us, t2=tm=400us at T2=2s for the low set.
PRESETS = {
    "high_T2_100ms": multi_param(
        p1=5e-3, p2=2.5e-2, pi=4.5e-3, pm=4.5e-3,
        p_idle_1=7.5e-5, p_idle_2=1e-3, p_idle_m=1.5e-3,
        name="high_T2_100ms"),
    "low_T2_2s": multi_param(
        p1=1e-4, p2=1e-3, pi=1e-4, pm=1e-4,
        p_idle_1=3.75e-6, p_idle_2=1e-4, p_idle_m=1e-4,
        name="low_T2_2s"),
}

PRESET_TIMES = {
    "high_T2_100ms": {"T2": 100e-3, "t1": 15e-6, "t2": 200e-6, "tm": 300e-6},
    "low_T2_2s": {"T2": 2.0, "t1": 15e-6, "t2": 400e-6, "tm": 400e-6},
}


def preset(name: str) -> NoiseModel:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; have {sorted(PRESETS)}")
    return PRESETS[name]


def from_config(spec: dict) -> NoiseModel:
    spec = dict(spec)
    if "preset" in spec:
        base = preset(spec.pop("preset"))
        if spec.get("collapse_idle"):
            return multi_param(base.p1, base.p2, base.pi, base.pm,
                               collapse_idle=True, p_idle=spec["p_idle"],
                               name=base.name + "+collapsed_idle")
        return base
    variant = spec.pop("variant")
    if variant == "single_param":
        return single_param(spec["p"])
    return multi_param(**spec)


@dataclass(frozen=True)
class FaultLocation:
    index: int            # position in the program's location order
    kind: str             # instruction kind or "idle"
    qubits: tuple[int, ...]
    arity: int
    noise_class: str
    timing: str           # "after_gate" | "before_measurement" | "after_prep" | "idle"
    segment: int
    layer: int


def enumerate_locations(program, model: NoiseModel) -> list[FaultLocation]:
    """Deterministic ordered fault locations of a compiled program.

    Idle locations appear only for models that price idling.
    """
    out = []
    include_idle = model.variant == "multi_param"
    for si, seg in enumerate(program.segments):
        for step in seg.steps:
            if step.kind == "gate" and step.noise_class is not None:
                ins = step.ins
                timing = ("before_measurement" if ins.kind.startswith("Measure")
                          else "after_prep" if ins.kind.startswith("Prep")
                          else "after_gate")
                out.append(FaultLocation(step.loc_index, ins.kind, ins.qubits,
                                         len(ins.qubits), step.noise_class, timing,
                                         si, ins.layer))
            elif step.kind == "idle" and include_idle:
                for off, (q, cls) in enumerate(step.idles):
                    out.append(FaultLocation(step.loc_index + off, "idle", (q,), 1,
                                             cls, "idle", si, step.layer))
    return out


def expected_fault_count(program, model: NoiseModel) -> float:
    return sum(model.rate(loc.noise_class) for loc in enumerate_locations(program, model))


# -- channel sampling ---------------------------------------------------------

# the 15 non-identity two-qubit Paulis as (x0,z0,x1,z1) bit patterns, ordered
# I,X,Y,Z per factor with identity-identity removed
TWO_QUBIT_PAULIS = [(x0, z0, x1, z1)
                    for x0, z0 in ((0, 0), (1, 0), (1, 1), (0, 1))
                    for x1, z1 in ((0, 0), (1, 0), (1, 1), (0, 1))][1:]
ONE_QUBIT_PAULIS = [(1, 0), (1, 1), (0, 1)]  # X, Y, Z


def pauli_from_uniform(u: float, p: float, qubits: tuple[int, ...]):
    """Map one uniform draw to a fault (x_mask, z_mask) or None.

    Subdivides [0, p) evenly over the channel's non-identity Paulis, so one
    draw decides both occurrence and type.
    """
    if u >= p:
        return None
    if len(qubits) == 1:
        k = min(2, int(u / p * 3))
        x, z = ONE_QUBIT_PAULIS[k]
        return (x << qubits[0], z << qubits[0])
    k = min(14, int(u / p * 15))
    x0, z0, x1, z1 = TWO_QUBIT_PAULIS[k]
    a, b = qubits
    return ((x0 << a) | (x1 << b), (z0 << a) | (z1 << b))


class SequentialFaultSampler:
    """Per-shot fault source drawing one uniform per visited location.

    Used by the tableau and statevector runners; both visit locations in the
    same order, so a shared seed gives identical fault streams.
    """

    def __init__(self, model: NoiseModel, program, rng):
        self.model = model
        self.rng = rng
        self._class_of = {}
        for seg in program.segments:
            for step in seg.steps:
                if step.kind == "gate" and step.noise_class is not None:
                    self._class_of[step.loc_index] = step.noise_class
                elif step.kind == "idle":
                    for off, (q, cls) in enumerate(step.idles):
                        self._class_of[step.loc_index + off] = cls

    def __call__(self, key, qubits):
        loc = key[1]
        p = self.model.rate(self._class_of[loc])
        if p == 0.0:
            return None
        u = float(self.rng.random())
        if key[0] == "idle":
            return (0, 1 << qubits[0]) if u < p else None
        return pauli_from_uniform(u, p, qubits)
