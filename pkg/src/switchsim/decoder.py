"""Brute-force lookup-table decoders per code and error sector.

Sector "X" corrects X-type errors (syndromes are parities against the
Z-stabilizers); sector "Z" corrects Z-type errors (syndromes against the
X-stabilizers).  Tables are built by enumerating errors in increasing weight
with lexicographic tie-breaking, then filling any remaining syndromes with a
deterministic Gaussian-elimination solution, so identical inputs always give
byte-identical tables.
"""
from __future__ import annotations

import io
import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import gf2
from .codes import CssCode, build_code
from .pauli import PauliString

BLOB_MAGIC = "switchsim-lookup-v1"
_TABLE_CAP_BITS = 20


@dataclass
class LookupTable:
    code_name: str
    sector: str                 # error type corrected: "X" or "Z"
    syndrome_bits: int
    corrections: list[int]      # syndrome int -> correction support mask
    n: int
    check_masks: tuple[int, ...]    # stabilizers defining the syndrome
    logical_mask: int               # logical flipped by sector-type errors

    def correction_for(self, syndrome: int) -> int:
        return self.corrections[syndrome]

    def correction_pauli(self, syndrome: int) -> PauliString:
        m = self.corrections[syndrome]
        return PauliString(self.n, x=m) if self.sector == "X" else PauliString(self.n, z=m)

    def syndrome_of(self, error_mask: int) -> int:
        s = 0
        for j, chk in enumerate(self.check_masks):
            s |= gf2.parity(error_mask & chk) << j
        return s

    def decode_readout(self, bits) -> tuple[int, tuple[int, ...], int]:
        """Decode a transversal readout string.

        Returns (logical value, syndrome bits, correction mask).  The readout
        basis is Z for sector "X" tables and X for sector "Z" tables.
        """
        if len(bits) != self.n:
            raise ValueError(f"readout length {len(bits)} != n={self.n}")
        word = 0
        for q, b in enumerate(bits):
            word |= (b & 1) << q
        synd = self.syndrome_of(word)
        corr = self.corrections[synd]
        raw = gf2.parity(word & self.logical_mask)
        value = raw ^ gf2.parity(corr & self.logical_mask)
        return value, tuple(synd >> j & 1 for j in range(self.syndrome_bits)), corr

    def logical_flip_array(self) -> np.ndarray:
        """uint8[2^s]: parity of each correction with the logical support."""
        out = np.zeros(len(self.corrections), dtype=np.uint8)
        for s, m in enumerate(self.corrections):
            out[s] = gf2.parity(m & self.logical_mask)
        return out

    def correction_matrix(self) -> np.ndarray:
        """bool[2^s, n]: correction supports, for vectorized adjudication."""
        out = np.zeros((len(self.corrections), self.n), dtype=bool)
        for s, m in enumerate(self.corrections):
            for q in gf2.indices_from_mask(m):
                out[s, q] = True
        return out

    # -- persistence ----------------------------------------------------------

    def to_blob(self) -> bytes:
        header = {"magic": BLOB_MAGIC, "code": self.code_name, "sector": self.sector,
                  "syndrome_bits": self.syndrome_bits, "n": self.n}
        buf = io.BytesIO()
        arr = np.zeros((len(self.corrections), 2), dtype=np.uint64)
        for i, m in enumerate(self.corrections):
            arr[i, 0] = m & 0xFFFFFFFFFFFFFFFF
            arr[i, 1] = m >> 64
        np.save(buf, arr)
        return json.dumps(header).encode() + b"\n" + buf.getvalue()

    @staticmethod
    def from_blob(blob: bytes) -> "LookupTable":
        head, _, body = blob.partition(b"\n")
        header = json.loads(head)
        if header.get("magic") != BLOB_MAGIC:
            raise ValueError("not a switchsim lookup blob")
        arr = np.load(io.BytesIO(body))
        corrections = [int(arr[i, 0]) | (int(arr[i, 1]) << 64) for i in range(len(arr))]
        code = build_code(header["code"])
        sector = header["sector"]
        checks = code.z_masks if sector == "X" else code.x_masks
        logical = code.logical_z_mask if sector == "X" else code.logical_x_mask
        return LookupTable(header["code"], sector, header["syndrome_bits"],
                           corrections, header["n"], checks, logical)


def build_lookup(code: CssCode | str, sector: str, enum_weight: int | None = None) -> LookupTable:
    """Minimum-weight lookup decoder for one error sector.

    Errors are enumerated by increasing weight (lexicographic within a
    weight); the first error producing a syndrome wins.  Syndromes still
    unfilled after the enumeration bound get a deterministic linear-algebra
    solution of whatever weight it has.
    """
    if isinstance(code, str):
        code = build_code(code)
    if sector not in ("X", "Z"):
        raise ValueError("sector must be 'X' or 'Z'")
    checks = code.z_masks if sector == "X" else code.x_masks
    logical = code.logical_z_mask if sector == "X" else code.logical_x_mask
    s = len(checks)
    if s > _TABLE_CAP_BITS:
        raise ValueError(f"{code.name} sector {sector}: 2^{s} table exceeds the "
                         f"2^{_TABLE_CAP_BITS} cap")
    size = 1 << s
    if enum_weight is None:
        enum_weight = 6 if code.n <= 20 else 4
    corrections: list[int | None] = [None] * size
    corrections[0] = 0
    filled = 1
    for w in range(1, enum_weight + 1):
        if filled == size:
            break
        for combo in itertools.combinations(range(code.n), w):
            e = gf2.mask_from_indices(combo)
            syn = 0
            for j, chk in enumerate(checks):
                syn |= gf2.parity(e & chk) << j
            if corrections[syn] is None:
                corrections[syn] = e
                filled += 1
                if filled == size:
                    break
    if filled < size:
        for syn in range(size):
            if corrections[syn] is None:
                e = gf2.solve(list(checks), code.n, syn)
                corrections[syn] = e if e is not None else 0
    return LookupTable(code.name, sector, s, corrections, code.n, checks, logical)


_LOOKUP_CACHE: dict[tuple[str, str], LookupTable] = {}


def get_lookup(code_name: str, sector: str) -> LookupTable:
    key = (code_name, sector)
    if key not in _LOOKUP_CACHE:
        _LOOKUP_CACHE[key] = build_lookup(code_name, sector)
    return _LOOKUP_CACHE[key]


# -- failure adjudication ------------------------------------------------------

_INPUT_LOGICAL = {"zero": "Z", "plus": "X", "plus_i": "Y"}


def input_logical_pauli(code: CssCode, input_state: str) -> PauliString:
    kind = _INPUT_LOGICAL[input_state]
    if kind == "Z":
        return code.logical_z_pauli()
    if kind == "X":
        return code.logical_x_pauli()
    return PauliString(code.n, code.logical_x_mask, code.logical_z_mask, 1)


def adjudicate_failure(tableau, block: tuple[int, ...], code: CssCode,
                       input_state: str) -> bool:
    """Noiseless decoding round on the output block, then read the sign of
    the input state's logical operator.  Failure iff the sign is -1.

    `tableau` is a stabsim.Tableau whose block qubits hold the final state.
    """
    n = tableau.n
    emb = {q: block[q] for q in range(code.n)}

    def embed(x_mask, z_mask):
        x = sum(1 << emb[q] for q in gf2.indices_from_mask(x_mask))
        z = sum(1 << emb[q] for q in gf2.indices_from_mask(z_mask))
        return x, z

    for sector in ("X", "Z"):
        table = get_lookup(code.name, sector)
        syn = 0
        for j, chk in enumerate(table.check_masks):
            if sector == "X":
                x, z = embed(0, chk)
            else:
                x, z = embed(chk, 0)
            sign = tableau.expectation(PauliString(n, x, z))
            if sign is None:
                raise AssertionError("output block syndrome not deterministic")
            syn |= (sign == -1) << j
        corr = table.corrections[syn]
        x, z = embed(corr, 0) if sector == "X" else embed(0, corr)
        if x or z:
            tableau.apply_pauli(PauliString(n, x, z))
    logical = input_logical_pauli(code, input_state)
    x, z = embed(logical.x, logical.z)
    sign = tableau.expectation(PauliString(n, x, z, logical.phase))
    if sign is None:
        raise AssertionError("logical sign not deterministic after correction")
    return sign == -1


def adjudicate_frames(fx: np.ndarray, fz: np.ndarray, block, code: CssCode,
                      input_state: str) -> np.ndarray:
    """Vectorized frame-based version of adjudicate_failure.

    fx/fz: (shots, n_qubits) frame components.  Returns a failure mask.
    """
    cols = list(block)
    ex = fx[:, cols].astype(np.uint8)   # X-type error components on the block
    ez = fz[:, cols].astype(np.uint8)

    def sector_flip(err, sector):
        table = get_lookup(code.name, sector)
        mat = np.zeros((table.syndrome_bits, code.n), dtype=np.uint8)
        for j, chk in enumerate(table.check_masks):
            mat[j, gf2.indices_from_mask(chk)] = 1
        synd = (err @ mat.T) & 1
        synd_int = synd.astype(np.int64) @ (1 << np.arange(table.syndrome_bits, dtype=np.int64))
        logical_cols = gf2.indices_from_mask(table.logical_mask)
        raw = err[:, logical_cols].sum(axis=1) & 1
        return (raw ^ table.logical_flip_array()[synd_int]).astype(bool)

    flip_logical_z = sector_flip(ex, "X")   # X errors flip the Z logical
    flip_logical_x = sector_flip(ez, "Z")
    kind = _INPUT_LOGICAL[input_state]
    if kind == "Z":
        return flip_logical_z
    if kind == "X":
        return flip_logical_x
    return flip_logical_z ^ flip_logical_x
