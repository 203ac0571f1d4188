"""Finite-dimensional complex Hilbert-space primitives.

States (kets and bras), operators with cached Hermitian/unitary flags,
tensor products, spectral decomposition into eigenspace projectors, and
unitary time evolution under piecewise-constant Hamiltonian schedules
(hbar = 1 throughout).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    NotHermitianError,
    TimeWindowError,
    ZeroStateError,
)

#: construction-time tolerance for state normalization
NORM_TOL = 1e-12
#: tolerance for the cached hermitian / unitary operator flags
FLAG_TOL = 1e-10
#: default tolerance below which adjacent eigenvalues are merged
DEGENERACY_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.flags.writeable = False


def _normalized_amplitudes(amplitudes) -> np.ndarray:
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1).copy()
    if vec.size == 0:
        raise DimensionError("state needs at least one amplitude")
    norm = np.linalg.norm(vec)
    if not np.isfinite(norm) or norm == 0.0:
        raise ZeroStateError("state norm must be finite and positive")
    # skip the division for already-normalized input so that round-tripping
    # a stored state reproduces its amplitudes bit-exactly
    if abs(norm - 1.0) > NORM_TOL:
        vec /= norm
    vec.flags.writeable = False
    return vec


@dataclass(frozen=True, eq=False)
class Ket:
    """Forward-evolving state |psi>, stored normalized to unit norm.

    Amplitudes are normalized at construction; the input's global scale is
    discarded (it carries no physics), while any global phase is kept.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _normalized_amplitudes(self.amplitudes))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def dagger(self) -> "Bra":
        """Adjoint covector <psi| of this state."""
        return Bra(self.amplitudes)


@dataclass(frozen=True, eq=False)
class Bra:
    """Backward-evolving state <phi|.

    Stores the components of the underlying ket; conjugation happens in the
    pairing, so ``overlap(Bra(v), Ket(w)) == vdot(v, w)``.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _normalized_amplitudes(self.amplitudes))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def dagger(self) -> Ket:
        """The underlying ket |phi>."""
        return Ket(self.amplitudes)


def make_ket(amplitudes) -> Ket:
    """Build a normalized Ket from a sequence of complex amplitudes.

    Raises
    ------
    DimensionError
        If the sequence is empty.
    ZeroStateError
        If the amplitudes have zero (or non-finite) norm.
    """
    return Ket(amplitudes)


def make_bra(amplitudes) -> Bra:
    """Build a normalized Bra from the components of its underlying ket."""
    return Bra(amplitudes)


def overlap(bra: Bra, ket: Ket) -> complex:
    """Hermitian pairing <phi|psi>; conjugates the bra components."""
    if bra.dim != ket.dim:
        raise DimensionError(f"bra dim {bra.dim} != ket dim {ket.dim}")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix on the Hilbert space with verified structural flags.

    ``is_hermitian`` and ``is_unitary`` are computed (not user asserted) at
    construction, with tolerance ``FLAG_TOL`` on the max-abs deviation.
    """

    matrix: np.ndarray
    is_hermitian: bool = field(init=False)
    is_unitary: bool = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).copy()
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionError(f"operator matrix must be square and non-empty, got shape {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(
            self, "is_hermitian", bool(np.max(np.abs(m - m.conj().T)) <= FLAG_TOL)
        )
        eye = np.eye(m.shape[0])
        object.__setattr__(
            self, "is_unitary", bool(np.max(np.abs(m.conj().T @ m - eye)) <= FLAG_TOL)
        )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        if self.dim != other.dim:
            raise DimensionError("operator dims differ")
        return Operator(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls(np.eye(dim, dtype=complex))


def matrix_element(bra: Bra, op: Operator, ket: Ket) -> complex:
    """Sandwich <phi|M|psi>."""
    if not (bra.dim == op.dim == ket.dim):
        raise DimensionError("bra/operator/ket dims differ")
    return complex(np.vdot(bra.amplitudes, op.matrix @ ket.amplitudes))


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian operator with its spectral decomposition cached.

    ``eigenvalues`` are sorted ascending with degenerate values merged;
    ``projectors[i]`` projects onto the i-th merged eigenspace. Use
    :func:`spectral_decompose` to construct one.
    """

    op: Operator
    eigenvalues: tuple
    projectors: tuple

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def spectrum(self) -> tuple:
        """Pairs (eigenvalue, projector), ascending in eigenvalue."""
        return tuple(zip(self.eigenvalues, self.projectors))

    @property
    def max_abs_eigenvalue(self) -> float:
        return max(abs(e) for e in self.eigenvalues)


def spectral_decompose(op: Operator, degeneracy_tol: float = DEGENERACY_TOL) -> Observable:
    """Decompose a Hermitian operator into eigenvalue/projector pairs.

    Adjacent eigenvalues closer than ``degeneracy_tol`` are merged into a
    single eigenspace; the merged eigenvalue is their mean. The projectors
    are mutually orthogonal idempotents summing to the identity.

    Raises
    ------
    NotHermitianError
        If the operator fails the Hermitian check.
    """
    if isinstance(op, np.ndarray):
        op = Operator(op)
    if not op.is_hermitian:
        raise NotHermitianError("spectral decomposition requires a Hermitian operator")
    w, v = np.linalg.eigh(op.matrix)
    eigenvalues = []
    projectors = []
    i = 0
    n = w.size
    while i < n:
        j = i
        while j + 1 < n and w[j + 1] - w[j] <= degeneracy_tol:
            j += 1
        block = v[:, i : j + 1]
        proj = block @ block.conj().T
        proj = (proj + proj.conj().T) / 2.0
        eigenvalues.append(float(np.mean(w[i : j + 1])))
        projectors.append(Operator(proj))
        i = j + 1
    return Observable(op=op, eigenvalues=tuple(eigenvalues), projectors=tuple(projectors))


def tensor(a, b):
    """Kronecker product of two kets, two bras, or two operators.

    The left factor is the slow (most significant) index: basis state
    ``|i>`` of ``a`` and ``|j>`` of ``b`` map to index ``i * b.dim + j``.
    """
    if isinstance(a, Ket) and isinstance(b, Ket):
        return Ket(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Bra) and isinstance(b, Bra):
        return Bra(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, Operator) and isinstance(b, Operator):
        return Operator(np.kron(a.matrix, b.matrix))
    raise TypeError(f"tensor operands must be two Kets, two Bras, or two Operators, got {type(a).__name__} and {type(b).__name__}")


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """Piecewise-constant Hamiltonian over an ordered list of time segments.

    Each segment is ``(duration, H)`` with ``duration >= 0`` and Hermitian
    ``H``. Time ordering is realized as the ordered product of segment
    exponentials ``exp(-i H_k dt_k)``; hbar = 1.
    """

    segments: tuple

    def __post_init__(self):
        cleaned = []
        for duration, h in self.segments:
            duration = float(duration)
            if duration < 0.0:
                raise ValueError("segment durations must be non-negative")
            if isinstance(h, np.ndarray):
                h = Operator(h)
            if not h.is_hermitian:
                raise NotHermitianError("segment Hamiltonians must be Hermitian")
            cleaned.append((duration, h))
        if cleaned:
            dims = {h.dim for _, h in cleaned}
            if len(dims) != 1:
                raise DimensionError("all segment Hamiltonians must share one dimension")
        object.__setattr__(self, "segments", tuple(cleaned))

    @classmethod
    def constant(cls, h, duration: float) -> "HamiltonianSchedule":
        return cls(((duration, h),))

    @classmethod
    def free(cls) -> "HamiltonianSchedule":
        """Empty schedule: no evolution."""
        return cls(())

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.segments)

    @property
    def dim(self):
        return self.segments[0][1].dim if self.segments else None

    def split_at(self, t: float):
        """Split into schedules spanning [0, t] and [t, total_duration].

        Raises
        ------
        TimeWindowError
            If ``t`` lies outside the schedule's time window.
        """
        total = self.total_duration
        if t < -1e-12 or t > total + 1e-12:
            raise TimeWindowError(f"time {t} outside schedule window [0, {total}]")
        t = min(max(t, 0.0), total)
        before = []
        after = []
        elapsed = 0.0
        for duration, h in self.segments:
            seg_end = elapsed + duration
            if seg_end <= t + 1e-12:
                before.append((duration, h))
            elif elapsed >= t - 1e-12:
                after.append((duration, h))
            else:
                before.append((t - elapsed, h))
                after.append((seg_end - t, h))
            elapsed = seg_end
        return HamiltonianSchedule(tuple(before)), HamiltonianSchedule(tuple(after))


def _segment_unitary(h: Operator, duration: float) -> np.ndarray:
    # exact for Hermitian generators: U = V exp(-i w dt) V^dagger
    w, v = np.linalg.eigh(h.matrix)
    return (v * np.exp(-1j * w * duration)) @ v.conj().T


def evolve_forward(state: Ket, schedule: HamiltonianSchedule) -> Ket:
    """Evolve a ket through the schedule, earliest segment applied first."""
    if schedule.dim is not None and schedule.dim != state.dim:
        raise DimensionError("schedule dimension does not match state")
    amps = state.amplitudes
    for duration, h in schedule.segments:
        amps = _segment_unitary(h, duration) @ amps
    return Ket(amps)


def evolve_backward(bra: Bra, schedule: HamiltonianSchedule) -> Bra:
    """Evolve a bra back to the schedule's start time.

    Contract: the pairing is evolution invariant,
    ``overlap(evolve_backward(phi, S), psi) == overlap(phi, evolve_forward(psi, S))``
    for every ket ``psi``. Equivalently the stored components are acted on
    by the adjoints of the segment unitaries, latest segment first.
    """
    if schedule.dim is not None and schedule.dim != bra.dim:
        raise DimensionError("schedule dimension does not match state")
    comps = bra.amplitudes
    for duration, h in reversed(schedule.segments):
        comps = _segment_unitary(h, duration).conj().T @ comps
    return Bra(comps)
