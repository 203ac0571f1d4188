"""Two-state vectors and their calculus.

A system between a pre-selection |psi> and a post-selection <phi| is
described by the pair <phi| |psi>. This module implements conditional
outcome probabilities for an intermediate ideal measurement (the
Aharonov-Bergmann-Lebowitz rule), weak values, the generalization of both
to weighted superpositions of two-state vectors (including construction
from an unmeasured ancilla), certainty reports ("elements of reality"),
product-rule analysis, and the two-time correlation kernel pairing a
forward-evolving particle with a backward-evolving one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    NotMeasurableError,
    NullEnsembleError,
    OrthogonalSelectionError,
)
from .qcore import (
    Bra,
    HamiltonianSchedule,
    Ket,
    Observable,
    Operator,
    evolve_backward,
    evolve_forward,
    matrix_element,
    overlap,
    spectral_decompose,
)

#: |<phi|psi>| at or below this counts as an orthogonal selection
ORTHOGONALITY_THRESHOLD = 1e-10
#: default tolerance for calling an outcome certain
CERTAINTY_TOL = 1e-10
#: squared-amplitude mass below which an ensemble is considered empty
_NULL_WEIGHT = 1e-24


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    """The pair <phi| |psi> with the overlap <phi|psi> cached."""

    forward: Ket
    backward: Bra
    overlap: complex = field(init=False)

    def __post_init__(self):
        if self.forward.dim != self.backward.dim:
            raise DimensionError("forward and backward states must share a dimension")
        object.__setattr__(self, "overlap", overlap(self.backward, self.forward))

    @property
    def dim(self) -> int:
        return self.forward.dim


@dataclass(frozen=True, eq=False)
class GeneralizedTwoStateVector:
    """Weighted superposition of two-state vectors: sum_i alpha_i <phi_i| |psi_i>.

    Arises from pre- and post-selecting a system jointly with an ancilla
    that is not measured in between; see :func:`gtsv_from_ancilla`.
    """

    terms: tuple  # of (alpha: complex, backward: Bra, forward: Ket)

    def __post_init__(self):
        terms = tuple((complex(a), b, f) for a, b, f in self.terms)
        if not terms:
            raise DimensionError("generalized two-state vector needs at least one term")
        dims = {f.dim for _, _, f in terms} | {b.dim for _, b, _ in terms}
        if len(dims) != 1:
            raise DimensionError("all terms must share one dimension")
        if not any(abs(a) > 0.0 for a, _, _ in terms):
            raise NullEnsembleError("all term weights vanish")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return self.terms[0][2].dim

    @classmethod
    def from_two_state_vector(cls, tsv: TwoStateVector) -> "GeneralizedTwoStateVector":
        return cls(((1.0 + 0.0j, tsv.backward, tsv.forward),))


@dataclass(frozen=True, eq=False)
class TwoTimeKernel:
    """Operator-valued correlation object |i>_A <j|_B.

    Links a forward-evolving particle A with a backward-evolving particle B:
    rows index the A space, columns the B space. Must be nonzero.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex).copy()
        if m.ndim != 2 or 0 in m.shape:
            raise DimensionError("kernel must be a non-empty matrix")
        if np.linalg.norm(m) == 0.0:
            raise NullEnsembleError("kernel must be nonzero")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim_forward(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_backward(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class Distribution:
    """Normalized outcome -> probability table, outcomes ascending."""

    entries: tuple  # of (outcome: float, probability: float)

    def __post_init__(self):
        entries = tuple((float(o), float(p)) for o, p in self.entries)
        if any(p < 0.0 for _, p in entries):
            raise ValueError("probabilities must be non-negative")
        total = sum(p for _, p in entries)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "entries", entries)

    @property
    def outcomes(self) -> tuple:
        return tuple(o for o, _ in self.entries)

    @property
    def probabilities(self) -> tuple:
        return tuple(p for _, p in self.entries)

    def as_dict(self) -> dict:
        return dict(self.entries)

    def max_entry(self) -> tuple:
        """(outcome, probability) of the most likely outcome."""
        return max(self.entries, key=lambda e: e[1])


@dataclass(frozen=True)
class CertaintyReport:
    """Whether an observable's intermediate outcome is dispersion-free."""

    label: str
    certain: bool
    value: float | None
    probability: float


def _distribution_from_weights(observable: Observable, weights) -> Distribution:
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= _NULL_WEIGHT:
        raise NullEnsembleError(
            "this pre/post-selection is incompatible with measuring this observable at this time"
        )
    probs = weights / total
    probs = probs / probs.sum()
    return Distribution(tuple(zip(observable.eigenvalues, probs)))


def abl_probabilities(tsv: TwoStateVector, obs: Observable) -> Distribution:
    """Conditional outcome probabilities of an intermediate ideal measurement.

    Implements the Aharonov-Bergmann-Lebowitz rule

        Prob(o_n) = |<phi| P_n |psi>|^2 / sum_j |<phi| P_j |psi>|^2

    over the observable's merged eigenspace projectors.

    Raises
    ------
    NullEnsembleError
        If every amplitude <phi|P_n|psi> vanishes (the denominator is zero).
    """
    if tsv.dim != obs.dim:
        raise DimensionError("two-state vector and observable dims differ")
    weights = [
        abs(matrix_element(tsv.backward, proj, tsv.forward)) ** 2
        for proj in obs.projectors
    ]
    return _distribution_from_weights(obs, weights)


def abl_at_time(
    pre: Ket,
    post: Bra,
    schedule: HamiltonianSchedule,
    t: float,
    obs: Observable,
) -> Distribution:
    """Intermediate-measurement probabilities at time ``t`` inside a schedule.

    The schedule starts at time 0 (where ``pre`` is selected) and ends at
    its total duration (where ``post`` is selected). The forward state is
    evolved over [0, t], the backward state over [t, end], and the ABL rule
    is applied to the resulting pair. Only the one backward state needs
    evolving for any number of observables at ``t``.

    Raises
    ------
    TimeWindowError
        If ``t`` lies outside the schedule window.
    """
    earlier, later = schedule.split_at(t)
    forward = evolve_forward(pre, earlier)
    backward = evolve_backward(post, later)
    return abl_probabilities(TwoStateVector(forward, backward), obs)


def abl_probabilities_generalized(
    g: GeneralizedTwoStateVector, obs: Observable
) -> Distribution:
    """ABL rule for a generalized two-state vector.

    The term sum is coherent, inside the modulus:

        Prob(o_n) = |sum_i alpha_i <phi_i| P_n |psi_i>|^2 / (normalization)

    which is the unique form consistent with reducing a joint system with an
    unmeasured ancilla (see :func:`gtsv_from_ancilla`).
    """
    if g.dim != obs.dim:
        raise DimensionError("generalized two-state vector and observable dims differ")
    weights = []
    for proj in obs.projectors:
        amp = sum(a * matrix_element(b, proj, f) for a, b, f in g.terms)
        weights.append(abs(amp) ** 2)
    return _distribution_from_weights(obs, weights)


def gtsv_from_ancilla(
    joint_pre: Ket,
    joint_post: Bra,
    system_dim: int,
    ancilla_dim: int,
) -> GeneralizedTwoStateVector:
    """Reduce a jointly selected system+ancilla pair to a generalized TSV.

    The joint states live on system (x) ancilla with the system as the slow
    tensor factor. Expanding both over the computational ancilla basis,

        |pre>  = sum_i |psi_i>_S |i>_A,      <post| = sum_i <phi_i|_S <i|_A,

    yields one term per ancilla basis state: alpha_i is the product of the
    two expansion norms and phi_i, psi_i are the normalized sector states.
    Terms whose weight vanishes are dropped.

    Raises
    ------
    DimensionError
        If the joint dimension is not system_dim * ancilla_dim.
    NullEnsembleError
        If no term survives (every sector pairing is empty).
    """
    if system_dim <= 0 or ancilla_dim <= 0:
        raise DimensionError("factor dimensions must be positive")
    if joint_pre.dim != system_dim * ancilla_dim or joint_post.dim != joint_pre.dim:
        raise DimensionError(
            f"joint dim {joint_pre.dim}/{joint_post.dim} != {system_dim} * {ancilla_dim}"
        )
    pre_sectors = joint_pre.amplitudes.reshape(system_dim, ancilla_dim)
    post_sectors = joint_post.amplitudes.reshape(system_dim, ancilla_dim)
    terms = []
    for i in range(ancilla_dim):
        fwd = pre_sectors[:, i]
        bwd = post_sectors[:, i]
        weight = np.linalg.norm(fwd) * np.linalg.norm(bwd)
        if weight <= 1e-14:
            continue
        terms.append((complex(weight), Bra(bwd), Ket(fwd)))
    if not terms:
        raise NullEnsembleError("pre- and post-selection share no ancilla sector")
    return GeneralizedTwoStateVector(tuple(terms))


def weak_value(
    tsv: TwoStateVector,
    op: Operator,
    threshold: float = ORTHOGONALITY_THRESHOLD,
) -> complex:
    """Weak value <phi|O|psi> / <phi|psi>; complex in general.

    This is the effective coupling seen by a weakly coupled probe, and may
    lie far outside the operator's eigenvalue range.

    Raises
    ------
    OrthogonalSelectionError
        If |<phi|psi>| is at or below ``threshold``; the ratio is undefined
        for orthogonal selections.
    """
    denom = tsv.overlap
    if abs(denom) <= threshold:
        raise OrthogonalSelectionError(
            f"pre/post overlap {abs(denom):.3e} is below the weak-value threshold"
        )
    return matrix_element(tsv.backward, op, tsv.forward) / denom


def weak_value_generalized(
    g: GeneralizedTwoStateVector,
    op: Operator,
    threshold: float = ORTHOGONALITY_THRESHOLD,
) -> complex:
    """Weak value of a generalized two-state vector.

    sum_i alpha_i <phi_i|O|psi_i> / sum_i alpha_i <phi_i|psi_i>, matching the
    joint-system weak value of O (x) identity under the ancilla reduction.
    """
    denom = sum(a * overlap(b, f) for a, b, f in g.terms)
    if abs(denom) <= threshold:
        raise OrthogonalSelectionError(
            f"effective overlap {abs(denom):.3e} is below the weak-value threshold"
        )
    num = sum(a * matrix_element(b, op, f) for a, b, f in g.terms)
    return num / denom


def element_of_reality(
    selection,
    obs: Observable,
    tol: float = CERTAINTY_TOL,
    label: str = "observable",
) -> CertaintyReport:
    """Report whether the observable's outcome is known with certainty.

    An observable whose intermediate-measurement outcome has conditional
    probability >= 1 - tol is dispersion-free for this selection; its value
    is then an element of reality in the operational sense.

    ``selection`` may be a TwoStateVector or a GeneralizedTwoStateVector.
    """
    if isinstance(selection, GeneralizedTwoStateVector):
        dist = abl_probabilities_generalized(selection, obs)
    else:
        dist = abl_probabilities(selection, obs)
    outcome, prob = dist.max_entry()
    if prob >= 1.0 - tol:
        return CertaintyReport(label=label, certain=True, value=outcome, probability=prob)
    return CertaintyReport(label=label, certain=False, value=None, probability=prob)


@dataclass(frozen=True)
class ProductRuleReport:
    """Certainty of A, B, and AB, and whether value(AB) = value(A)*value(B)."""

    a: CertaintyReport
    b: CertaintyReport
    product: CertaintyReport
    all_certain: bool
    product_rule_holds: bool | None  # None unless all three are certain


def product_rule_report(
    tsv,
    obs_a: Observable,
    obs_b: Observable,
    tol: float = CERTAINTY_TOL,
    value_tol: float = 1e-8,
) -> ProductRuleReport:
    """Check the product rule on a pre/post-selected system.

    Evaluates certainty of A, B, and of the product operator AB (which must
    be Hermitian to be measurable), then compares value(AB) against
    value(A) * value(B) when all three are certain. For pre/post-selected
    systems the comparison can fail even though each factor is certain; for
    purely pre-selected systems it always holds.

    Raises
    ------
    NotMeasurableError
        If the operator product is not Hermitian.
    """
    product_op = obs_a.op @ obs_b.op
    if not product_op.is_hermitian:
        raise NotMeasurableError("product of the observables is not Hermitian")
    product_obs = spectral_decompose(product_op)
    report_a = element_of_reality(tsv, obs_a, tol=tol, label="A")
    report_b = element_of_reality(tsv, obs_b, tol=tol, label="B")
    report_ab = element_of_reality(tsv, product_obs, tol=tol, label="AB")
    all_certain = report_a.certain and report_b.certain and report_ab.certain
    holds = None
    if all_certain:
        holds = bool(abs(report_ab.value - report_a.value * report_b.value) <= value_tol)
    return ProductRuleReport(
        a=report_a,
        b=report_b,
        product=report_ab,
        all_certain=all_certain,
        product_rule_holds=holds,
    )


def _rank_one_state(proj: Operator, space: str) -> None:
    m = proj.matrix
    if not proj.is_hermitian:
        raise ValueError(f"{space} projector must be Hermitian")
    if abs(np.trace(m) - 1.0) > 1e-9 or np.max(np.abs(m @ m - m)) > 1e-9:
        raise ValueError(f"{space} projector must be rank-1 idempotent")


def two_time_joint(k: TwoTimeKernel, proj_a: Operator, proj_b: Operator) -> float:
    """Joint outcome probability for one measurement on each kernel leg.

    With rank-1 projectors |a><a| on the forward leg and |b><b| on the
    backward leg,

        Prob(a, b) = |<a|K|b>|^2 / sum_{a', b'} |<a'|K|b'>|^2,

    where the sums run over full orthonormal bases. The denominator is the
    squared Frobenius norm of K, so the choice of completing bases is
    immaterial.
    """
    m = k.matrix
    if proj_a.dim != k.dim_forward or proj_b.dim != k.dim_backward:
        raise DimensionError("projector dims do not match the kernel legs")
    _rank_one_state(proj_a, "forward")
    _rank_one_state(proj_b, "backward")
    total = float(np.sum(np.abs(m) ** 2))
    if total <= _NULL_WEIGHT:
        raise NullEnsembleError("kernel has zero weight")
    joint = float(np.real(np.trace(proj_a.matrix @ m @ proj_b.matrix @ m.conj().T)))
    return max(joint, 0.0) / total
