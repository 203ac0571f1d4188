"""Self-checking scenario definitions for the classic pre/post-selection systems.

Each scenario packages a concrete selection (two-state vector, generalized
two-state vector, or two-time kernel), named observables, and a list of
executable checks with expected values. Provenance of each expected value
is one of:

* ``exact-property``: the value is the defining property the scenario exists
  to exhibit, exact by construction.
* ``cross-check``: the value is verified against an independent
  computational path.
* ``identity``: an algebraic identity of the formalism.
* ``statistical``: a Monte Carlo estimate checked within error bands.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SearchFailedError
from .qcore import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Bra,
    Ket,
    Operator,
    spectral_decompose,
)
from .tsv import (
    GeneralizedTwoStateVector,
    TwoStateVector,
    TwoTimeKernel,
    abl_probabilities,
    abl_probabilities_generalized,
    element_of_reality,
    gtsv_from_ancilla,
    product_rule_report,
    two_time_joint,
    weak_value,
)
from . import measure

_MC_SAMPLES = 100_000
_MC_SEED = 424242
_DIRECTION_SEED = 1105


def spin_along(direction) -> Operator:
    """Spin component n . sigma for a unit 3-vector n."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return Operator(n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z)


def _random_directions(count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(count, 3))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def _fmt(value) -> str:
    if isinstance(value, complex):
        return f"{value.real:.10g}{value.imag:+.10g}i"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


@dataclass(frozen=True)
class Check:
    description: str
    provenance: str
    run: callable = field(repr=False)


@dataclass(frozen=True)
class CheckResult:
    description: str
    provenance: str
    expected: str
    actual: str
    passed: bool


@dataclass(frozen=True)
class Scenario:
    """A named system plus its executable checks."""

    name: str
    description: str
    dims: tuple
    basis_labels: tuple
    observables: dict
    checks: tuple
    tsv: TwoStateVector | None = None
    gtsv: GeneralizedTwoStateVector | None = None
    kernel: TwoTimeKernel | None = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Report:
    scenario: str
    results: tuple
    passed: bool
    details: dict


def run_scenario(scenario: Scenario) -> Report:
    """Execute every check; the report fails iff any check fails."""
    results = []
    for check in scenario.checks:
        expected, actual, passed = check.run()
        results.append(
            CheckResult(
                description=check.description,
                provenance=check.provenance,
                expected=_fmt(expected),
                actual=_fmt(actual),
                passed=bool(passed),
            )
        )
    return Report(
        scenario=scenario.name,
        results=tuple(results),
        passed=all(r.passed for r in results),
        details=dict(scenario.details),
    )


def _certainty_check(selection, obs, expected_value, description, provenance="exact-property"):
    def run():
        report = element_of_reality(selection, obs)
        actual = report.value if report.certain else f"uncertain (max p={report.probability:.6g})"
        passed = report.certain and abs(report.value - expected_value) <= 1e-9
        return expected_value, actual, passed

    return Check(description=description, provenance=provenance, run=run)


def _weak_value_check(selection_weak, op, expected, description):
    def run():
        actual = selection_weak(op)
        return expected, actual, abs(actual - expected) <= 1e-10

    return Check(description=description, provenance="cross-check", run=run)


def _projector_sum_check(tsv, obs, description):
    def run():
        total = sum(weak_value(tsv, proj) for proj in obs.projectors)
        return 1.0, total, abs(total - 1.0) <= 1e-10

    return Check(description=description, provenance="identity", run=run)


def _monte_carlo_check(tsv, obs, description):
    def run():
        dist = abl_probabilities(tsv, obs)
        report = measure.monte_carlo_abl(
            tsv.forward, tsv.backward, obs, _MC_SAMPLES, seed=_MC_SEED
        )
        if report.samples_postselected == 0:
            return "frequencies within 5 standard errors", "no post-selected samples", False
        worst = 0.0
        for outcome, prob in dist.entries:
            freq = report.conditional_frequencies[outcome]
            se = report.standard_errors[outcome]
            worst = max(worst, abs(freq - prob) / se)
        return "max |z| <= 5", f"max |z| = {worst:.3g}", worst <= 5.0

    return Check(description=description, provenance="statistical", run=run)


def scenario_spin_box(include_empty_direction: bool = True) -> Scenario:
    """Spin-1/2 particle distributed over two boxes.

    Selected so that finding it in box A is certain whether one looks with
    spin up or with spin down, while the product of the two projections is
    certainly zero: certainty does not multiply. The box-B spin-up
    projection has weak value -1, outside the {0, 1} eigenvalue range.

    The basis direction |B,down> carries no amplitude; dropping it
    (``include_empty_direction=False``) must not change any check.
    """
    if include_empty_direction:
        labels = ("A_up", "A_down", "B_up", "B_down")
    else:
        labels = ("A_up", "A_down", "B_up")
    dim = len(labels)
    pre = np.zeros(dim, dtype=complex)
    pre[:3] = 1.0
    post = np.zeros(dim, dtype=complex)
    post[:3] = (1.0, 1.0, -1.0)
    tsv = TwoStateVector(Ket(pre), Bra(post))

    def projector(index):
        m = np.zeros((dim, dim), dtype=complex)
        m[index, index] = 1.0
        return spectral_decompose(Operator(m))

    observables = {
        "P_A_up": projector(0),
        "P_A_down": projector(1),
        "P_B_up": projector(2),
    }

    def product_check():
        report = product_rule_report(tsv, observables["P_A_up"], observables["P_A_down"])
        ok = (
            report.product.certain
            and abs(report.product.value) <= 1e-9
            and report.all_certain
            and report.product_rule_holds is False
        )
        actual = (
            f"product value {_fmt(report.product.value)}, rule holds: {report.product_rule_holds}"
            if report.product.certain
            else "product uncertain"
        )
        return "product certainly 0, rule fails", actual, ok

    checks = (
        _certainty_check(
            tsv, observables["P_A_up"], 1.0, "searching box A with spin up always finds the particle"
        ),
        _certainty_check(
            tsv,
            observables["P_A_down"],
            1.0,
            "searching box A with spin down (instead) always finds the particle",
        ),
        Check(
            description="the product of the two box-A projections is certainly 0: the product rule fails",
            provenance="exact-property",
            run=product_check,
        ),
        _weak_value_check(
            lambda op: weak_value(tsv, op),
            observables["P_B_up"].op,
            -1.0 + 0.0j,
            "weak value of the box-B spin-up projection lies outside [0, 1]",
        ),
        _projector_sum_check(
            tsv,
            observables["P_B_up"],
            "weak values of a complete projector set sum to 1",
        ),
    )
    return Scenario(
        name="spin-box",
        description="spin-1/2 particle in two boxes with contradictory certainties",
        dims=(dim,),
        basis_labels=labels,
        observables=observables,
        checks=checks,
        tsv=tsv,
    )


def scenario_three_box() -> Scenario:
    """One particle, three boxes: certainly in A if searched, certainly in B if searched instead."""
    pre = Ket(np.array([1.0, 1.0, 1.0], dtype=complex))
    post = Bra(np.array([1.0, 1.0, -1.0], dtype=complex))
    tsv = TwoStateVector(pre, post)

    def projector(index):
        m = np.zeros((3, 3), dtype=complex)
        m[index, index] = 1.0
        return spectral_decompose(Operator(m))

    observables = {"P_A": projector(0), "P_B": projector(1), "P_C": projector(2)}
    checks = (
        _certainty_check(tsv, observables["P_A"], 1.0, "opening box A always finds the particle"),
        _certainty_check(
            tsv, observables["P_B"], 1.0, "opening box B (instead) always finds the particle"
        ),
        _weak_value_check(
            lambda op: weak_value(tsv, op),
            observables["P_C"].op,
            -1.0 + 0.0j,
            "weak value of the box-C projection is -1",
        ),
        _monte_carlo_check(
            tsv,
            observables["P_A"],
            "forward-only Monte Carlo reproduces the box-A conditional probabilities",
        ),
        _monte_carlo_check(
            tsv,
            observables["P_B"],
            "forward-only Monte Carlo reproduces the box-B conditional probabilities",
        ),
    )
    return Scenario(
        name="three-box",
        description="single particle certain to be found in either of two boxes",
        dims=(3,),
        basis_labels=("A", "B", "C"),
        observables=observables,
        checks=checks,
        tsv=tsv,
    )


def scenario_spin_xz() -> Scenario:
    """Spin-1/2 selected along z then x: both components dispersion-free at once."""
    pre = Ket(np.array([1.0, 0.0], dtype=complex))  # up along z
    post = Bra(np.array([1.0, 1.0], dtype=complex))  # up along x
    tsv = TwoStateVector(pre, post)
    observables = {
        "sigma_z": spectral_decompose(Operator(SIGMA_Z)),
        "sigma_x": spectral_decompose(Operator(SIGMA_X)),
    }

    def uncertainty_principle_check():
        commutator = (
            observables["sigma_z"].op.matrix @ observables["sigma_x"].op.matrix
            - observables["sigma_x"].op.matrix @ observables["sigma_z"].op.matrix
        )
        z = element_of_reality(tsv, observables["sigma_z"])
        x = element_of_reality(tsv, observables["sigma_x"])
        noncommuting = np.max(np.abs(commutator)) > 1e-9
        ok = noncommuting and z.certain and x.certain
        return (
            "noncommuting pair, both certain",
            f"[sz,sx] != 0: {noncommuting}, sz certain: {z.certain}, sx certain: {x.certain}",
            ok,
        )

    checks = (
        _certainty_check(tsv, observables["sigma_z"], 1.0, "the z spin component is certainly +1"),
        _certainty_check(
            tsv, observables["sigma_x"], 1.0, "the x spin component (measured instead) is certainly +1"
        ),
        Check(
            description="two noncommuting observables are simultaneously dispersion-free",
            provenance="exact-property",
            run=uncertainty_principle_check,
        ),
    )
    return Scenario(
        name="spin-xz",
        description="z and x spin components simultaneously certain between selections",
        dims=(2,),
        basis_labels=("up_z", "down_z"),
        observables=observables,
        checks=checks,
        tsv=tsv,
    )


def _mean_king_candidate_basis():
    # Sign triples chosen pairwise differing in exactly two slots, which makes
    # the matrices I + s.sigma mutually Hilbert-Schmidt orthogonal.
    sign_triples = ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1))
    states = []
    for sx, sy, sz in sign_triples:
        m = np.eye(2, dtype=complex) + sx * SIGMA_X + sy * SIGMA_Y + sz * SIGMA_Z
        joint = m.conj().T.reshape(-1)  # system index slow, ancilla fast
        states.append(joint / np.linalg.norm(joint))
    return sign_triples, states


def scenario_mean_king() -> Scenario:
    """A spin plus an unmeasured ancilla: x, y, and z all dispersion-free.

    The joint pre-selection is maximally entangled; the four post-selection
    outcomes form an orthonormal entangled basis built so that, for each
    outcome, the reduced generalized two-state vector gives every spin
    component a definite value. The construction is verified here and a
    SearchFailedError is raised if verification fails; the value table
    (outcome -> x, y, z values) is recorded in the scenario details.
    """
    pre = Ket(np.array([1.0, 0.0, 0.0, 1.0], dtype=complex))
    sign_triples, post_states = _mean_king_candidate_basis()

    gram = np.array([[np.vdot(a, b) for b in post_states] for a in post_states])
    if np.max(np.abs(gram - np.eye(4))) > 1e-10:
        raise SearchFailedError("candidate royal basis is not orthonormal")

    components = {
        "sigma_x": spectral_decompose(Operator(SIGMA_X)),
        "sigma_y": spectral_decompose(Operator(SIGMA_Y)),
        "sigma_z": spectral_decompose(Operator(SIGMA_Z)),
    }
    reduced = [gtsv_from_ancilla(pre, Bra(vec), 2, 2) for vec in post_states]

    value_table = {}
    for outcome, g in enumerate(reduced):
        row = []
        for name, obs in components.items():
            dist = abl_probabilities_generalized(g, obs)
            value, prob = dist.max_entry()
            if prob < 1.0 - 1e-10:
                raise SearchFailedError(
                    f"royal outcome {outcome}: {name} not dispersion-free (p={prob})"
                )
            row.append(int(round(value)))
        if tuple(row) != sign_triples[outcome]:
            raise SearchFailedError(f"royal outcome {outcome}: value table mismatch")
        value_table[outcome] = tuple(row)

    def basis_check():
        dev = float(np.max(np.abs(gram - np.eye(4))))
        return "orthonormal entangled basis", f"max Gram deviation {dev:.3g}", dev <= 1e-10

    def outcome_check(outcome):
        def run():
            probs = []
            for obs in components.values():
                dist = abl_probabilities_generalized(reduced[outcome], obs)
                probs.append(dist.max_entry()[1])
            ok = all(p >= 1.0 - 1e-10 for p in probs)
            return (
                f"values {value_table[outcome]}, each with probability 1",
                f"values {value_table[outcome]}, min probability {min(probs):.12g}",
                ok,
            )

        return Check(
            description=f"royal outcome {outcome}: x, y and z spin components all dispersion-free",
            provenance="cross-check",
            run=run,
        )

    checks = (
        Check(
            description="the four royal post-selection states form an orthonormal basis",
            provenance="cross-check",
            run=basis_check,
        ),
        *[outcome_check(k) for k in range(4)],
    )
    return Scenario(
        name="mean-king",
        description="all three spin components answerable for every royal outcome",
        dims=(2, 2),
        basis_labels=("system", "ancilla"),
        observables=components,
        checks=checks,
        gtsv=reduced[0],
        details={
            "value_table": value_table,
            "royal_basis": [vec.tolist() for vec in post_states],
        },
    )


def scenario_correlated_pair() -> Scenario:
    """Forward/backward particle pair whose spins agree in every direction."""
    kernel = TwoTimeKernel(np.eye(2, dtype=complex) / np.sqrt(2.0))
    directions = _random_directions(100, _DIRECTION_SEED)

    def same_outcome_probability(k, direction):
        obs = spectral_decompose(spin_along(direction))
        total = 0.0
        for value_a, proj_a in obs.spectrum:
            for value_b, proj_b in obs.spectrum:
                if abs(value_a - value_b) <= 1e-9:
                    total += two_time_joint(k, proj_a, proj_b)
        return total

    def correlation_check():
        worst = 0.0
        for direction in directions:
            worst = max(worst, abs(same_outcome_probability(kernel, direction) - 1.0))
        return "P(same) = 1 in all 100 directions", f"max deviation {worst:.3g}", worst <= 1e-12

    def negative_control_check():
        generic = TwoTimeKernel(np.array([[1.0, 0.3], [0.1j, 0.7]], dtype=complex))
        worst = 0.0
        for direction in directions:
            worst = max(worst, abs(same_outcome_probability(generic, direction) - 1.0))
        return (
            "some direction violates P(same) = 1",
            f"max deviation {worst:.3g}",
            worst > 1e-6,
        )

    checks = (
        Check(
            description="both particles give the same spin result in any direction",
            provenance="exact-property",
            run=correlation_check,
        ),
        Check(
            description="a generic kernel (not proportional to the identity) breaks the correlation",
            provenance="cross-check",
            run=negative_control_check,
        ),
    )
    return Scenario(
        name="correlated-pair",
        description="forward- and backward-evolving spins perfectly correlated in every direction",
        dims=(2, 2),
        basis_labels=("forward", "backward"),
        observables={},
        checks=checks,
        kernel=kernel,
    )


SCENARIOS = {
    "spin-box": scenario_spin_box,
    "three-box": scenario_three_box,
    "spin-xz": scenario_spin_xz,
    "mean-king": scenario_mean_king,
    "correlated-pair": scenario_correlated_pair,
}


def get_scenario(name: str) -> Scenario:
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(sorted(SCENARIOS))}")
    return factory()
