"""Declarative problem files: JSON documents describing a selection to analyze.

A problem file carries subsystem dimensions, exactly one selection payload
(a pre/post pair, generalized terms, or a two-time kernel), named
observables, and an optional piecewise-constant Hamiltonian. Complex
numbers are always explicit [re, im] pairs; matrices are row-major nested
arrays; the leftmost subsystem is the most significant tensor index.

Floats are written with 17 significant decimal digits, which round-trips
IEEE doubles exactly: re-ingesting an exported file reproduces bit-identical
numbers and therefore bit-identical results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ProblemFileError
from .qcore import Bra, HamiltonianSchedule, Ket, Operator, spectral_decompose
from .tsv import GeneralizedTwoStateVector, TwoStateVector, TwoTimeKernel


@dataclass(frozen=True)
class ProblemFile:
    """Parsed, validated problem description."""

    dims: tuple
    observables: dict
    pre: Ket | None = None
    post: Bra | None = None
    hamiltonian: HamiltonianSchedule | None = None
    generalized: GeneralizedTwoStateVector | None = None
    kernel: TwoTimeKernel | None = None

    @property
    def total_dim(self) -> int:
        total = 1
        for d in self.dims:
            total *= d
        return total

    @property
    def mode(self) -> str:
        if self.pre is not None:
            return "selection"
        if self.generalized is not None:
            return "generalized"
        return "kernel"

    def two_state_vector(self) -> TwoStateVector:
        if self.pre is None or self.post is None:
            raise ProblemFileError("problem file has no pre/post selection pair")
        return TwoStateVector(self.pre, self.post)


def _parse_complex(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise ProblemFileError(f"{where}: complex numbers are [re, im] pairs, got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _parse_vector(value, length: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != length:
        raise ProblemFileError(f"{where}: expected a vector of {length} [re, im] pairs")
    return np.array([_parse_complex(v, where) for v in value], dtype=complex)


def _parse_matrix(value, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise ProblemFileError(f"{where}: expected {rows} matrix rows")
    return np.array(
        [_parse_vector(row, cols, f"{where} row {i}") for i, row in enumerate(value)]
    )


def parse_document(doc) -> ProblemFile:
    """Validate a decoded JSON document and build the problem objects.

    Raises
    ------
    ProblemFileError
        On any structural or consistency violation.
    """
    if not isinstance(doc, dict):
        raise ProblemFileError("problem document must be a JSON object")
    dims = doc.get("dims")
    if (
        not isinstance(dims, list)
        or not dims
        or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)
    ):
        raise ProblemFileError("dims must be a non-empty list of positive integers")
    dims = tuple(dims)
    total = 1
    for d in dims:
        total *= d

    has_pre = "pre" in doc
    has_post = "post" in doc
    if has_pre != has_post:
        raise ProblemFileError("pre and post must be given together")
    modes = [name for name, flag in (("pre/post", has_pre), ("generalized", "generalized" in doc), ("kernel", "kernel" in doc)) if flag]
    if len(modes) != 1:
        raise ProblemFileError(
            f"exactly one of pre+post, generalized, or kernel must be populated, got {modes or 'none'}"
        )

    pre = post = generalized = kernel = None
    if has_pre:
        pre = Ket(_parse_vector(doc["pre"], total, "pre"))
        post = Bra(_parse_vector(doc["post"], total, "post"))
    elif "generalized" in doc:
        raw_terms = doc["generalized"]
        if not isinstance(raw_terms, list) or not raw_terms:
            raise ProblemFileError("generalized must be a non-empty list of terms")
        terms = []
        for i, term in enumerate(raw_terms):
            if not isinstance(term, dict) or set(term) != {"alpha", "pre", "post"}:
                raise ProblemFileError(f"generalized term {i} needs alpha, pre, post")
            alpha = _parse_complex(term["alpha"], f"generalized term {i} alpha")
            fwd = Ket(_parse_vector(term["pre"], total, f"generalized term {i} pre"))
            bwd = Bra(_parse_vector(term["post"], total, f"generalized term {i} post"))
            terms.append((alpha, bwd, fwd))
        generalized = GeneralizedTwoStateVector(tuple(terms))
    else:
        kernel = TwoTimeKernel(_parse_matrix(doc["kernel"], total, total, "kernel"))

    schedule = None
    if "hamiltonian" in doc:
        raw = doc["hamiltonian"]
        if not isinstance(raw, list):
            raise ProblemFileError("hamiltonian must be a list of {duration, matrix} segments")
        segments = []
        for i, seg in enumerate(raw):
            if not isinstance(seg, dict) or set(seg) != {"duration", "matrix"}:
                raise ProblemFileError(f"hamiltonian segment {i} needs duration and matrix")
            duration = seg["duration"]
            if not isinstance(duration, (int, float)) or isinstance(duration, bool) or duration < 0:
                raise ProblemFileError(f"hamiltonian segment {i}: duration must be a non-negative number")
            matrix = _parse_matrix(seg["matrix"], total, total, f"hamiltonian segment {i}")
            segments.append((float(duration), Operator(matrix)))
        try:
            schedule = HamiltonianSchedule(tuple(segments))
        except Exception as exc:
            raise ProblemFileError(f"hamiltonian: {exc}") from exc

    observables = {}
    raw_obs = doc.get("observables", [])
    if not isinstance(raw_obs, list):
        raise ProblemFileError("observables must be a list of {name, matrix} entries")
    for i, entry in enumerate(raw_obs):
        if not isinstance(entry, dict) or set(entry) != {"name", "matrix"}:
            raise ProblemFileError(f"observable {i} needs exactly name and matrix")
        name = entry["name"]
        if not isinstance(name, str) or not name:
            raise ProblemFileError(f"observable {i}: name must be a non-empty string")
        if name in observables:
            raise ProblemFileError(f"duplicate observable name {name!r}")
        matrix = _parse_matrix(entry["matrix"], total, total, f"observable {name!r}")
        try:
            observables[name] = spectral_decompose(Operator(matrix))
        except Exception as exc:
            raise ProblemFileError(f"observable {name!r}: {exc}") from exc

    return ProblemFile(
        dims=dims,
        observables=observables,
        pre=pre,
        post=post,
        hamiltonian=schedule,
        generalized=generalized,
        kernel=kernel,
    )


def load(path) -> ProblemFile:
    """Read and parse a problem file from disk."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: invalid JSON: {exc}") from exc
    return parse_document(doc)


# ---------------------------------------------------------------------------
# document construction and 17-significant-digit serialization


def complex_pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def vector_pairs(vec) -> list:
    return [complex_pair(z) for z in np.asarray(vec).reshape(-1)]


def matrix_pairs(matrix) -> list:
    m = np.asarray(matrix)
    return [[complex_pair(z) for z in row] for row in m]


def document_from_parts(
    dims,
    observables=None,
    pre=None,
    post=None,
    hamiltonian=None,
    generalized_terms=None,
    kernel=None,
) -> dict:
    """Assemble a problem document from numpy-level parts."""
    doc = {"dims": [int(d) for d in dims]}
    if pre is not None:
        doc["pre"] = vector_pairs(pre)
        doc["post"] = vector_pairs(post)
    if generalized_terms is not None:
        doc["generalized"] = [
            {"alpha": complex_pair(alpha), "pre": vector_pairs(fwd), "post": vector_pairs(bwd)}
            for alpha, bwd, fwd in generalized_terms
        ]
    if kernel is not None:
        doc["kernel"] = matrix_pairs(kernel)
    if hamiltonian is not None:
        doc["hamiltonian"] = [
            {"duration": float(duration), "matrix": matrix_pairs(h)}
            for duration, h in hamiltonian
        ]
    doc["observables"] = [
        {"name": name, "matrix": matrix_pairs(matrix)}
        for name, matrix in (observables or {}).items()
    ]
    return doc


def _encode(value, indent: int) -> str:
    pad = "  " * indent
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        inner = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in value.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if any(isinstance(v, dict) for v in value):
            inner = ",\n".join(f"{pad}  {_encode(v, indent + 1)}" for v in value)
            return "[\n" + inner + "\n" + pad + "]"
        return "[" + ", ".join(_encode(v, indent) for v in value) + "]"
    raise TypeError(f"cannot encode {type(value).__name__} in a problem file")


def dumps_document(doc: dict) -> str:
    """Serialize a document with 17-significant-digit decimal floats."""
    return _encode(doc, 0) + "\n"


def save(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_document(doc))
