"""Registry of the six CSS codes with validation and brute-force distance checks.

Stabilizer supports and logical representatives live in ``data/codes.json``
(hand-checked transcriptions plus derived logicals for the two large 3D
codes); this module only loads, validates and interrogates them.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources

from . import gf2
from .pauli import PauliString

CODE_NAMES = ("steane7", "tetra15", "color17", "color19", "doubled49", "tetra65")

# 2D codes: protection is symmetric.  3D codes: the convention flag records
# which sector carries the high distance ("z_cells_3d" interchanges X and Z
# relative to the usual 3D color code, protecting against Z-errors).
CONVENTIONS = ("self_dual_2d", "z_cells_3d", "x_cells_3d")


@dataclass(frozen=True)
class CssCode:
    name: str
    n: int
    k: int
    x_stabilizers: tuple[tuple[int, ...], ...]
    z_stabilizers: tuple[tuple[int, ...], ...]
    logical_x: tuple[int, ...]
    logical_z: tuple[int, ...]
    d_x: int | None
    d_z: int | None
    convention: str

    # bitmask caches
    x_masks: tuple[int, ...] = field(init=False, repr=False)
    z_masks: tuple[int, ...] = field(init=False, repr=False)
    logical_x_mask: int = field(init=False, repr=False)
    logical_z_mask: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "x_masks",
                           tuple(gf2.mask_from_indices(s, self.n) for s in self.x_stabilizers))
        object.__setattr__(self, "z_masks",
                           tuple(gf2.mask_from_indices(s, self.n) for s in self.z_stabilizers))
        object.__setattr__(self, "logical_x_mask", gf2.mask_from_indices(self.logical_x, self.n))
        object.__setattr__(self, "logical_z_mask", gf2.mask_from_indices(self.logical_z, self.n))

    def stabilizer_paulis(self) -> list[PauliString]:
        out = [PauliString(self.n, x=m) for m in self.x_masks]
        out += [PauliString(self.n, z=m) for m in self.z_masks]
        return out

    def logical_x_pauli(self) -> PauliString:
        return PauliString(self.n, x=self.logical_x_mask)

    def logical_z_pauli(self) -> PauliString:
        return PauliString(self.n, z=self.logical_z_mask)

    def stab_masks(self, sector: str) -> tuple[int, ...]:
        return self.x_masks if sector == "X" else self.z_masks

    def logical_mask(self, sector: str) -> int:
        return self.logical_x_mask if sector == "X" else self.logical_z_mask

    def to_json_dict(self) -> dict:
        return {
            "name": self.name, "n": self.n, "k": self.k,
            "x_stabs": [list(s) for s in self.x_stabilizers],
            "z_stabs": [list(s) for s in self.z_stabilizers],
            "logical_x": list(self.logical_x), "logical_z": list(self.logical_z),
        }


def _load_registry() -> dict:
    with resources.files("switchsim.data").joinpath("codes.json").open() as f:
        return json.load(f)


_REGISTRY_RAW = _load_registry()
_CACHE: dict[str, CssCode] = {}


def build_code(name: str) -> CssCode:
    if name not in _REGISTRY_RAW:
        raise KeyError(f"unknown code {name!r}; known: {', '.join(CODE_NAMES)}")
    if name not in _CACHE:
        raw = _REGISTRY_RAW[name]
        _CACHE[name] = CssCode(
            name=name, n=raw["n"], k=raw["k"],
            x_stabilizers=tuple(tuple(s) for s in raw["x_stabilizers"]),
            z_stabilizers=tuple(tuple(s) for s in raw["z_stabilizers"]),
            logical_x=tuple(raw["logical_x"]), logical_z=tuple(raw["logical_z"]),
            d_x=raw["d_x"], d_z=raw["d_z"], convention=raw["convention"],
        )
    return _CACHE[name]


def all_codes() -> list[CssCode]:
    return [build_code(name) for name in CODE_NAMES]


@dataclass
class ValidationReport:
    code: str
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(code: CssCode) -> ValidationReport:
    """Check the CssCode invariants; violations are reported, not raised."""
    v: list[str] = []
    for i, a in enumerate(code.x_masks):
        for j, b in enumerate(code.z_masks):
            if gf2.parity(a & b):
                v.append(f"X-stabilizer {i} anticommutes with Z-stabilizer {j}")
    n_gen = len(code.x_masks) + len(code.z_masks)
    if n_gen != code.n - code.k:
        v.append(f"generator count {n_gen} != n-k = {code.n - code.k}")
    if gf2.rank(code.x_masks) != len(code.x_masks):
        v.append("X-stabilizers are linearly dependent")
    if gf2.rank(code.z_masks) != len(code.z_masks):
        v.append("Z-stabilizers are linearly dependent")
    if gf2.parity(code.logical_x_mask & code.logical_z_mask) != 1:
        v.append("logical X and Z do not anticommute")
    for i, b in enumerate(code.z_masks):
        if gf2.parity(code.logical_x_mask & b):
            v.append(f"logical X anticommutes with Z-stabilizer {i}")
    for i, a in enumerate(code.x_masks):
        if gf2.parity(code.logical_z_mask & a):
            v.append(f"logical Z anticommutes with X-stabilizer {i}")
    if gf2.RowEchelon(code.x_masks).contains(code.logical_x_mask):
        v.append("logical X lies in the X-stabilizer row space")
    if gf2.RowEchelon(code.z_masks).contains(code.logical_z_mask):
        v.append("logical Z lies in the Z-stabilizer row space")
    return ValidationReport(code.name, v)


@dataclass
class DistanceReport:
    code: str
    sector: str
    claimed_d: int
    confirmed: bool
    detail: str


def verify_distance(code: CssCode, sector: str, claimed_d: int,
                    check_existence: bool = True) -> DistanceReport:
    """Brute-force sector distance check.

    Enumerates all weight < claimed_d error vectors in the sector, confirming
    that none commutes with every opposite-sector stabilizer while lying
    outside the own-sector row space.  Optionally confirms a weight-claimed_d
    logical exists.
    """
    if sector not in ("X", "Z"):
        raise ValueError("sector must be 'X' or 'Z'")
    own = code.stab_masks(sector)
    other = code.stab_masks("Z" if sector == "X" else "X")
    budget = sum(_comb(code.n, w) for w in range(1, claimed_d))
    if budget > 50_000_000:
        raise ValueError(f"enumeration budget exceeded: {budget} candidates")
    span = gf2.RowEchelon(own)
    for w in range(1, claimed_d):
        for combo in itertools.combinations(range(code.n), w):
            e = gf2.mask_from_indices(combo)
            if any(gf2.parity(e & s) for s in other):
                continue
            if not span.contains(e):
                return DistanceReport(code.name, sector, claimed_d, False,
                                      f"weight-{w} logical at qubits {sorted(combo)}")
    if check_existence:
        rep = span.reduce(code.logical_mask(sector))
        if gf2.weight(rep) != claimed_d:
            found = _find_weight_d_logical(code, sector, claimed_d, span, other)
            if found is None:
                return DistanceReport(code.name, sector, claimed_d, False,
                                      f"no weight-{claimed_d} logical found")
    return DistanceReport(code.name, sector, claimed_d, True,
                          f"no logical below weight {claimed_d}")


def _find_weight_d_logical(code, sector, d, span, other):
    for combo in itertools.combinations(range(code.n), d):
        e = gf2.mask_from_indices(combo)
        if any(gf2.parity(e & s) for s in other):
            continue
        if not span.contains(e):
            return combo
    return None


def _comb(n, w):
    out = 1
    for i in range(w):
        out = out * (n - i) // (i + 1)
    return out
