"""Pairwise compatibility deciders with constructive witnesses.

Every decider classifies its device pair as compatible, weakly
compatible only, or strongly incompatible, and ships a witness that is
re-validated before being returned: a joint instrument containing both
devices, or a pair of instruments sharing one total channel. Cheap
analytic fast paths run before the feasibility engine and tag the
verdict; a flag disables them so the engine can be cross-checked
against independent oracles.

The deciders answering only the weak question (``weakly_compatible_*``)
use ``weakly_compatible_only`` for a positive answer; whether the pair
is in fact fully compatible is outside their scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import feasibility as fs
from .devices import (
    CPMap,
    Effect,
    Instrument,
    KrausSet,
    Observable,
    PointerMap,
    apply_h,
    instrument_part_effect,
    kraus_from_choi,
    total_channel,
)
from .matkit import (
    DEFAULT_TOL,
    MatrixShapeError,
    Tolerances,
    close,
    frob_norm,
    hermitian_part,
    mat_sqrt,
)
from .order import (
    commutes_with_range,
    cp_leq,
    is_pure,
    is_trivial_effect,
    pure_pair_compatible,
    rank1_upper_channels_equal,
    trace_deficit,
)


class UnsupportedPairError(ValueError):
    """The device pair kind has no decider."""


@dataclass(frozen=True, eq=False)
class CompatWitness:
    """Joint instrument carrying both devices as parts.

    Subsets (for effects, operations, channels) or pointer maps (for
    observables) record how each device arises.
    """

    instrument: Instrument
    part_1: tuple[str, ...] | None = None
    part_2: tuple[str, ...] | None = None
    pointer_1: PointerMap | None = None
    pointer_2: PointerMap | None = None
    joint_observable: Observable | None = None


@dataclass(frozen=True, eq=False)
class WeakWitness:
    """Two instruments with one total channel, one device part in each."""

    instrument_1: Instrument
    instrument_2: Instrument
    common_channel: CPMap
    part_1: tuple[str, ...] | None = None
    part_2: tuple[str, ...] | None = None
    pointer_1: PointerMap | None = None
    pointer_2: PointerMap | None = None


@dataclass(frozen=True, eq=False)
class Verdict:
    relation: str  # compatible | weakly_compatible_only | strongly_incompatible | undecided
    witness: CompatWitness | WeakWitness | None = None
    notes: str = ""

    def __post_init__(self) -> None:
        allowed = {"compatible", "weakly_compatible_only", "strongly_incompatible", "undecided"}
        if self.relation not in allowed:
            raise ValueError(f"unknown relation {self.relation!r}")


def witness_tolerances(tol: Tolerances) -> Tolerances:
    """Relaxed thresholds for devices assembled from solver output.

    Engine witnesses satisfy constraints to feas_tol, not eq_tol, so
    re-validation anywhere downstream scales with the solver precision.
    """
    c = 100.0
    return Tolerances(
        eq_tol=max(tol.eq_tol, c * tol.feas_tol),
        psd_tol=max(tol.psd_tol, c * tol.feas_tol),
        feas_tol=c * tol.feas_tol,
    )


def state_prep_map(effect_matrix: np.ndarray, eta: np.ndarray, tol: Tolerances) -> CPMap:
    """The operation ``rho -> tr[E rho] eta``."""
    e = hermitian_part(np.asarray(effect_matrix, dtype=complex))
    return CPMap(e.shape[0], eta.shape[0], np.kron(e.T, eta), tol=tol)


def effect_as_binary_observable(e: Effect, tol: Tolerances = DEFAULT_TOL) -> Observable:
    return Observable(
        ("1", "0"),
        {"1": e, "0": Effect(np.eye(e.dim) - e.matrix, tol=tol)},
        tol=tol,
    )


# ---------------------------------------------------------------------------
# witness assembly and re-validation
# ---------------------------------------------------------------------------


class WitnessValidationError(AssertionError):
    """A constructed witness failed its re-validation; internal error."""


def _check_effect_part(ins: Instrument, subset, e: Effect, wtol: Tolerances) -> None:
    got = instrument_part_effect(ins, subset, wtol)
    if not close(e.matrix, got.matrix, wtol):
        raise WitnessValidationError("effect is not reproduced by the witness subset")


def _check_op_part(ins: Instrument, subset, f: CPMap, wtol: Tolerances) -> None:
    got = ins.branch_sum(subset, wtol)
    if not close(f.choi, got.choi, wtol):
        raise WitnessValidationError("operation is not reproduced by the witness subset")


def _check_obs_part(ins: Instrument, pointer: PointerMap, a: Observable, wtol: Tolerances) -> None:
    pointer.check_total(ins.outcomes)
    for x in a.outcomes:
        got = instrument_part_effect(ins, pointer.preimage(x), wtol)
        if not close(a.effects[x].matrix, got.matrix, wtol):
            raise WitnessValidationError("observable is not reproduced by the witness pointer")


def _check_ins_part(ins: Instrument, pointer: PointerMap, dev: Instrument, wtol: Tolerances) -> None:
    pointer.check_total(ins.outcomes)
    for x in dev.outcomes:
        got = ins.branch_sum(pointer.preimage(x), wtol)
        if not close(dev.branches[x].choi, got.choi, wtol):
            raise WitnessValidationError("instrument is not reproduced by the witness pointer")


def _check_device_part(ins: Instrument, device, subset, pointer, wtol: Tolerances) -> None:
    if isinstance(device, Effect):
        _check_effect_part(ins, subset, device, wtol)
    elif isinstance(device, Observable):
        _check_obs_part(ins, pointer, device, wtol)
    elif isinstance(device, Instrument):
        _check_ins_part(ins, pointer, device, wtol)
    elif isinstance(device, CPMap):
        _check_op_part(ins, subset, device, wtol)
    else:
        raise TypeError(f"unsupported witness device {type(device).__name__}")


def _compatible(
    dev1,
    dev2,
    instrument: Instrument,
    notes: str,
    wtol: Tolerances,
    part_1=None,
    part_2=None,
    pointer_1=None,
    pointer_2=None,
    joint_observable=None,
) -> Verdict:
    _check_device_part(instrument, dev1, part_1, pointer_1, wtol)
    _check_device_part(instrument, dev2, part_2, pointer_2, wtol)
    w = CompatWitness(instrument, part_1, part_2, pointer_1, pointer_2, joint_observable)
    return Verdict("compatible", w, notes)


def _weakly(
    dev1,
    dev2,
    i1: Instrument,
    i2: Instrument,
    notes: str,
    wtol: Tolerances,
    part_1=None,
    part_2=None,
    pointer_1=None,
    pointer_2=None,
) -> Verdict:
    lam1, lam2 = total_channel(i1, wtol), total_channel(i2, wtol)
    if not close(lam1.choi, lam2.choi, wtol):
        raise WitnessValidationError("witness instruments do not share their total channel")
    _check_device_part(i1, dev1, part_1, pointer_1, wtol)
    _check_device_part(i2, dev2, part_2, pointer_2, wtol)
    w = WeakWitness(i1, i2, lam1, part_1, part_2, pointer_1, pointer_2)
    return Verdict("weakly_compatible_only", w, notes)


def _contraction_weak_witness(
    obs1: Observable, obs2: Observable, dev1, dev2, notes: str, tol: Tolerances
) -> Verdict:
    """Always-available weak witness for classical-output devices.

    Both instruments measure-and-prepare into one fixed state, so their
    totals coincide with the contraction channel to that state.
    """
    d = obs1.dim
    eta = np.eye(d) / d
    i1 = Instrument(
        obs1.outcomes,
        {x: state_prep_map(obs1.effects[x].matrix, eta, tol) for x in obs1.outcomes},
        tol=tol,
    )
    i2 = Instrument(
        obs2.outcomes,
        {x: state_prep_map(obs2.effects[x].matrix, eta, tol) for x in obs2.outcomes},
        tol=tol,
    )
    kwargs = {}
    for side, dev, obs in (("1", dev1, obs1), ("2", dev2, obs2)):
        if isinstance(dev, Effect):
            kwargs[f"part_{side}"] = ("1",)
        else:
            kwargs[f"pointer_{side}"] = PointerMap({x: x for x in obs.outcomes})
    return _weakly(dev1, dev2, i1, i2, notes, tol, **kwargs)


# ---------------------------------------------------------------------------
# effect-effect
# ---------------------------------------------------------------------------


def _is_projection(e: Effect, tol: Tolerances) -> bool:
    return close(e.matrix @ e.matrix, e.matrix, tol)


def _commute(a: np.ndarray, b: np.ndarray, tol: Tolerances) -> bool:
    return close(a @ b, b @ a, tol)


def _coexistence_instrument(g: dict[str, Effect], dim: int, tol: Tolerances) -> Instrument:
    eta = np.eye(dim) / dim
    return Instrument(
        tuple(g), {x: state_prep_map(g[x].matrix, eta, tol) for x in g}, tol=tol
    )


def coexistence_problem(e1: Effect, e2: Effect) -> fs.FeasibilityProblem:
    """Four-outcome feasibility normal form for effect coexistence."""
    d = e1.dim
    blocks = tuple((n, d) for n in ("g11", "g10", "g01", "g00"))
    cons = (
        fs.encode_sum_constraint(("g11", "g10"), e1.matrix, label="margin-1"),
        fs.encode_sum_constraint(("g11", "g01"), e2.matrix, label="margin-2"),
        fs.encode_sum_constraint(("g11", "g10", "g01", "g00"), np.eye(d), label="total"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def coexistent_effects(
    e1: Effect,
    e2: Effect,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Classify an effect pair; incompatible effect pairs are always weak.

    Compatibility is coexistence: a four-outcome joint observable with
    the two effects as margins. Fast paths: commuting effects, summed
    effects below the identity, and the exact projection-commutation
    criterion.
    """
    if e1.dim != e2.dim:
        raise MatrixShapeError("effects live on different spaces")
    d = e1.dim
    wtol = witness_tolerances(tol)

    def verdict_from_g11(g11: np.ndarray, notes: str, vtol: Tolerances) -> Verdict:
        g = {
            "11": Effect(g11, tol=vtol),
            "10": Effect(e1.matrix - g11, tol=vtol),
            "01": Effect(e2.matrix - g11, tol=vtol),
            "00": Effect(np.eye(d) - e1.matrix - e2.matrix + g11, tol=vtol),
        }
        obs = Observable(tuple(g), g, tol=vtol)
        ins = _coexistence_instrument(g, d, vtol)
        return _compatible(
            e1, e2, ins, notes, vtol,
            part_1=("11", "10"), part_2=("11", "01"), joint_observable=obs,
        )

    if fast_paths:
        if _commute(e1.matrix, e2.matrix, tol):
            g11 = hermitian_part(e1.matrix @ e2.matrix)
            return verdict_from_g11(g11, "fast-path: commuting-effects", wtol)
        top = float(np.linalg.eigvalsh(hermitian_part(e1.matrix + e2.matrix))[-1])
        if top <= 1.0 + tol.psd_tol:
            return verdict_from_g11(np.zeros((d, d)), "fast-path: sum-below-identity", wtol)
        if _is_projection(e1, tol) or _is_projection(e2, tol):
            # projection vs effect: compatible iff commuting, and they do not
            return _contraction_weak_witness(
                effect_as_binary_observable(e1, tol),
                effect_as_binary_observable(e2, tol),
                e1, e2, "fast-path: projection-commutation", tol,
            )

    out = fs.solve(coexistence_problem(e1, e2), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        return verdict_from_g11(out.witness["g11"], "sdp", wtol)
    if out.verdict == "infeasible":
        return _contraction_weak_witness(
            effect_as_binary_observable(e1, tol),
            effect_as_binary_observable(e2, tol),
            e1, e2, f"sdp margin={out.margin:.3e}", tol,
        )
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


def weakly_compatible_ef_ef(e1: Effect, e2: Effect, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """All effect pairs are weakly compatible; returns the construction."""
    if e1.dim != e2.dim:
        raise MatrixShapeError("effects live on different spaces")
    return _contraction_weak_witness(
        effect_as_binary_observable(e1, tol),
        effect_as_binary_observable(e2, tol),
        e1, e2, "always weakly compatible", tol,
    )


# ---------------------------------------------------------------------------
# observable-observable
# ---------------------------------------------------------------------------


def joint_measurability_problem(a1: Observable, a2: Observable) -> fs.FeasibilityProblem:
    d = a1.dim
    blocks = []
    cons = []
    for i, x in enumerate(a1.outcomes):
        for j, y in enumerate(a2.outcomes):
            blocks.append((f"g{i}_{j}", d))
    for i, x in enumerate(a1.outcomes):
        names = [f"g{i}_{j}" for j in range(len(a2.outcomes))]
        cons.append(fs.encode_sum_constraint(names, a1.effects[x].matrix, label=f"row-{x}"))
    for j, y in enumerate(a2.outcomes):
        names = [f"g{i}_{j}" for i in range(len(a1.outcomes))]
        cons.append(fs.encode_sum_constraint(names, a2.effects[y].matrix, label=f"col-{y}"))
    return fs.FeasibilityProblem(tuple(blocks), tuple(cons))


def _joint_label(x: str, y: str) -> str:
    return f"{x}&{y}"


def _joint_verdict(
    a1: Observable,
    a2: Observable,
    dev1,
    dev2,
    g: dict[tuple[str, str], np.ndarray],
    notes: str,
    vtol: Tolerances,
) -> Verdict:
    d = a1.dim
    effects = {_joint_label(x, y): Effect(m, tol=vtol) for (x, y), m in g.items()}
    obs = Observable(tuple(effects), effects, tol=vtol)
    ins = _coexistence_instrument(effects, d, vtol)
    p1 = PointerMap({_joint_label(x, y): x for x in a1.outcomes for y in a2.outcomes},
                    codomain=a1.outcomes)
    p2 = PointerMap({_joint_label(x, y): y for x in a1.outcomes for y in a2.outcomes},
                    codomain=a2.outcomes)
    kwargs = {}
    for side, dev, pointer in (("1", dev1, p1), ("2", dev2, p2)):
        if isinstance(dev, Effect):
            # the effect arises from the rows where its binary promotion fired "1"
            kwargs[f"part_{side}"] = tuple(
                lab for lab, tgt in pointer.mapping.items() if tgt == "1"
            )
        else:
            kwargs[f"pointer_{side}"] = pointer
    return _compatible(dev1, dev2, ins, notes, vtol, joint_observable=obs, **kwargs)


def jointly_measurable(
    a1: Observable,
    a2: Observable,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    dev1=None,
    dev2=None,
    trace=None,
) -> Verdict:
    """Classify an observable pair; incompatible observables remain weak.

    ``dev1``/``dev2`` override the devices recorded in the witness (used
    when an effect was promoted to its binary observable).
    """
    if a1.dim != a2.dim:
        raise MatrixShapeError("observables live on different spaces")
    dev1 = a1 if dev1 is None else dev1
    dev2 = a2 if dev2 is None else dev2
    wtol = witness_tolerances(tol)

    if fast_paths:
        trivial_1 = all(is_trivial_effect(a1.effects[x], tol) for x in a1.outcomes)
        trivial_2 = all(is_trivial_effect(a2.effects[x], tol) for x in a2.outcomes)
        if trivial_1 or trivial_2:
            if trivial_1:
                weights = {x: float(np.trace(a1.effects[x].matrix).real) / a1.dim
                           for x in a1.outcomes}
                g = {(x, y): weights[x] * a2.effects[y].matrix
                     for x in a1.outcomes for y in a2.outcomes}
            else:
                weights = {y: float(np.trace(a2.effects[y].matrix).real) / a2.dim
                           for y in a2.outcomes}
                g = {(x, y): weights[y] * a1.effects[x].matrix
                     for x in a1.outcomes for y in a2.outcomes}
            return _joint_verdict(a1, a2, dev1, dev2, g, "fast-path: trivial-observable", wtol)
        if all(
            _commute(a1.effects[x].matrix, a2.effects[y].matrix, tol)
            for x in a1.outcomes
            for y in a2.outcomes
        ):
            g = {
                (x, y): hermitian_part(a1.effects[x].matrix @ a2.effects[y].matrix)
                for x in a1.outcomes
                for y in a2.outcomes
            }
            return _joint_verdict(a1, a2, dev1, dev2, g, "fast-path: commuting-observables", wtol)

    out = fs.solve(joint_measurability_problem(a1, a2), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        g = {
            (x, y): out.witness[f"g{i}_{j}"]
            for i, x in enumerate(a1.outcomes)
            for j, y in enumerate(a2.outcomes)
        }
        return _joint_verdict(a1, a2, dev1, dev2, g, "sdp", wtol)
    if out.verdict == "infeasible":
        return _contraction_weak_witness(
            a1, a2, dev1, dev2, f"sdp margin={out.margin:.3e}", tol
        )
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


def weakly_compatible_obs_obs(a1: Observable, a2: Observable, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """All observable pairs are weakly compatible; returns the construction."""
    if a1.dim != a2.dim:
        raise MatrixShapeError("observables live on different spaces")
    return _contraction_weak_witness(a1, a2, a1, a2, "always weakly compatible", tol)


# ---------------------------------------------------------------------------
# operation-operation
# ---------------------------------------------------------------------------


def _completion_branch(deficit: np.ndarray, dout: int, tol: Tolerances) -> CPMap:
    """Measure the leftover effect and prepare the maximally mixed state."""
    return state_prep_map(deficit, np.eye(dout) / dout, tol)


def _sum_split_instrument(f1: CPMap, f2: CPMap, tol: Tolerances) -> Verdict | None:
    """Ternary witness when the trace deficits leave room for both maps."""
    gram = f1.heisenberg_unit() + f2.heisenberg_unit()
    if float(np.linalg.eigvalsh(hermitian_part(gram))[-1]) > 1.0 + tol.psd_tol:
        return None
    leftover = hermitian_part(np.eye(f1.dim_in) - gram)
    ins = Instrument(
        ("1", "2", "3"),
        {
            "1": f1,
            "2": f2,
            "3": _completion_branch(leftover, f1.dim_out, tol),
        },
        tol=tol,
    )
    return _compatible(
        f1, f2, ins, "fast-path: sum-below-identity", tol, part_1=("1",), part_2=("2",)
    )


def _comparable_instrument(lo: CPMap, hi: CPMap, tol: Tolerances):
    diff = CPMap(lo.dim_in, lo.dim_out, hermitian_part(hi.choi - lo.choi), tol=tol)
    leftover = hermitian_part(np.eye(lo.dim_in) - hi.heisenberg_unit())
    return Instrument(
        ("1", "2", "3"),
        {"1": lo, "2": diff, "3": _completion_branch(leftover, lo.dim_out, tol)},
        tol=tol,
    )


def op_op_problem(f1: CPMap, f2: CPMap) -> fs.FeasibilityProblem:
    """Four-block compatibility normal form for two operations."""
    side = f1.dim_in * f1.dim_out
    dims = (f1.dim_in, f1.dim_out)
    blocks = tuple((n, side) for n in ("p11", "p10", "p01", "p00"))
    pt = fs.encode_partial_trace_constraint("p11", dims, 0, np.eye(f1.dim_in))
    total_terms = tuple(
        (n, pt.terms[0][1]) for n in ("p11", "p10", "p01", "p00")
    )
    cons = (
        fs.encode_sum_constraint(("p11", "p10"), f1.choi, label="device-1"),
        fs.encode_sum_constraint(("p11", "p01"), f2.choi, label="device-2"),
        fs.AffineConstraint(total_terms, pt.rhs, label="total-channel"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def _four_block_instrument(out: fs.FeasibilityOutcome, dims, vtol: Tolerances) -> Instrument:
    din, dout = dims
    branches = {
        lab: CPMap(din, dout, out.witness[f"p{lab}"], tol=vtol)
        for lab in ("11", "10", "01", "00")
    }
    return Instrument(("11", "10", "01", "00"), branches, tol=vtol)


def op_op_compatible(
    f1: CPMap,
    f2: CPMap,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Full three-way classification of an operation pair.

    Fast paths decide comparable pairs, pairs whose deficits leave room
    for both, and pure pairs (analytic oracle); otherwise the four-block
    feasibility problem decides compatibility and the weak decider
    refines the incompatible case.
    """
    if (f1.dim_in, f1.dim_out) != (f2.dim_in, f2.dim_out):
        raise MatrixShapeError("operations must share input and output spaces")
    wtol = witness_tolerances(tol)
    compatible = None  # None = unknown, True/False decided
    notes = ""

    if fast_paths:
        if cp_leq(f1, f2, tol):
            ins = _comparable_instrument(f1, f2, tol)
            return _compatible(f1, f2, ins, "fast-path: comparable", tol,
                               part_1=("1",), part_2=("1", "2"))
        if cp_leq(f2, f1, tol):
            ins = _comparable_instrument(f2, f1, tol)
            return _compatible(f1, f2, ins, "fast-path: comparable", tol,
                               part_1=("1", "2"), part_2=("1",))
        v = _sum_split_instrument(f1, f2, tol)
        if v is not None:
            return v
        if is_pure(f1, tol) and is_pure(f2, tol):
            # comparability and the sum condition were just excluded
            compatible = pure_pair_compatible(f1, f2, tol)
            notes = "fast-path: pure-oracle"
            if compatible:
                raise WitnessValidationError(
                    "pure oracle claims compatibility outside its construction cases"
                )

    if compatible is None:
        out = fs.solve(op_op_problem(f1, f2), tol, max_iter, trace=trace)
        if out.verdict == "feasible":
            ins = _four_block_instrument(out, (f1.dim_in, f1.dim_out), wtol)
            return _compatible(f1, f2, ins, "sdp", wtol,
                               part_1=("11", "10"), part_2=("11", "01"))
        if out.verdict == "undecided":
            return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")
        compatible = False
        notes = f"sdp margin={out.margin:.3e}"

    weak = weakly_compatible_ops(f1, f2, tol, fast_paths=fast_paths, max_iter=max_iter, trace=trace)
    if weak.relation == "weakly_compatible_only":
        return Verdict("weakly_compatible_only", weak.witness, f"{notes}; {weak.notes}")
    if weak.relation == "strongly_incompatible":
        return Verdict("strongly_incompatible", None, f"{notes}; {weak.notes}")
    return Verdict("undecided", None, f"not compatible; weak undecided; {notes}")


def weak_ops_problem(f1: CPMap, f2: CPMap) -> fs.FeasibilityProblem:
    """Common-upper-channel feasibility form for the weak question."""
    side = f1.dim_in * f1.dim_out
    dims = (f1.dim_in, f1.dim_out)
    blocks = (("lam", side), ("d1", side), ("d2", side))
    cons = (
        fs.encode_sum_constraint((("lam", 1.0), ("d1", -1.0)), f1.choi, label="above-1"),
        fs.encode_sum_constraint((("lam", 1.0), ("d2", -1.0)), f2.choi, label="above-2"),
        fs.encode_partial_trace_constraint("lam", dims, 0, np.eye(f1.dim_in), label="channel"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def _weak_ops_witness(f1: CPMap, f2: CPMap, lam: CPMap, notes: str, vtol: Tolerances) -> Verdict:
    i1 = Instrument(
        ("0", "1"),
        {"0": f1, "1": CPMap(f1.dim_in, f1.dim_out,
                             hermitian_part(lam.choi - f1.choi), tol=vtol)},
        tol=vtol,
    )
    i2 = Instrument(
        ("0", "1"),
        {"0": f2, "1": CPMap(f2.dim_in, f2.dim_out,
                             hermitian_part(lam.choi - f2.choi), tol=vtol)},
        tol=vtol,
    )
    return _weakly(f1, f2, i1, i2, notes, vtol, part_1=("0",), part_2=("0",))


def weakly_compatible_ops(
    f1: CPMap,
    f2: CPMap,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Decide the weak question for two operations.

    Positive answers come back as ``weakly_compatible_only`` with a
    common upper channel and the two completion instruments; whether
    the pair is additionally compatible is not examined here.
    """
    if (f1.dim_in, f1.dim_out) != (f2.dim_in, f2.dim_out):
        raise MatrixShapeError("operations must share input and output spaces")
    wtol = witness_tolerances(tol)

    if fast_paths:
        tp1, tp2 = f1.is_trace_preserving(tol), f2.is_trace_preserving(tol)
        if tp1 or tp2:
            # a channel in the pair forces the common upper channel to equal it
            if tp1 and tp2:
                ok = close(f1.choi, f2.choi, tol)
            elif tp1:
                ok = cp_leq(f2, f1, tol)
            else:
                ok = cp_leq(f1, f2, tol)
            if not ok:
                return Verdict("strongly_incompatible", None, "fast-path: cp-order")
            lam = CPMap(f1.dim_in, f1.dim_out, (f1 if tp1 else f2).choi, kind="channel", tol=tol)
            return _weak_ops_witness(f1, f2, lam, "fast-path: cp-order", tol)
        r1 = int(np.sum(np.linalg.eigvalsh(trace_deficit(f1)) > tol.psd_tol))
        r2 = int(np.sum(np.linalg.eigvalsh(trace_deficit(f2)) > tol.psd_tol))
        if r1 <= 1 and r2 <= 1:
            overlap = rank1_upper_channels_equal(f1, f2, tol)
            if overlap.equal:
                return _weak_ops_witness(
                    f1, f2, overlap.channel, "fast-path: rank1-family", tol
                )
            sep = "separating state found" if overlap.separating_state is not None else overlap.reason
            return Verdict("strongly_incompatible", None, f"fast-path: rank1-family ({sep})")

    out = fs.solve(weak_ops_problem(f1, f2), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        lam = CPMap(f1.dim_in, f1.dim_out, out.witness["lam"], kind="channel", tol=wtol)
        return _weak_ops_witness(f1, f2, lam, "sdp", wtol)
    if out.verdict == "infeasible":
        return Verdict("strongly_incompatible", None, f"sdp margin={out.margin:.3e}")
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


# ---------------------------------------------------------------------------
# operation-effect
# ---------------------------------------------------------------------------


def op_ef_problem(f: CPMap, e: Effect) -> fs.FeasibilityProblem:
    side = f.dim_in * f.dim_out
    dims = (f.dim_in, f.dim_out)
    blocks = tuple((n, side) for n in ("p11", "p10", "p01", "p00"))
    hu = fs.encode_heisenberg_unit_constraint("p11", dims, e.matrix)
    effect_terms = (("p11", hu.terms[0][1]), ("p01", hu.terms[0][1]))
    pt = fs.encode_partial_trace_constraint("p11", dims, 0, np.eye(f.dim_in))
    total_terms = tuple((n, pt.terms[0][1]) for n in ("p11", "p10", "p01", "p00"))
    cons = (
        fs.encode_sum_constraint(("p11", "p10"), f.choi, label="operation"),
        fs.AffineConstraint(effect_terms, hu.rhs, label="effect"),
        fs.AffineConstraint(total_terms, pt.rhs, label="total-channel"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def _commuting_range_instrument(f: CPMap, e: Effect, tol: Tolerances) -> Instrument:
    """Four-branch split of f along an effect commuting with its range."""
    root = mat_sqrt(e.matrix, tol)
    comp_root = mat_sqrt(np.eye(e.dim) - e.matrix, tol)
    ks = kraus_from_choi(f, tol)
    inside = KrausSet(tuple(k @ root for k in ks.ops), tol=tol)
    outside = KrausSet(tuple(k @ comp_root for k in ks.ops), tol=tol)
    from .devices import choi_from_kraus

    deficit = hermitian_part(np.eye(f.dim_in) - f.heisenberg_unit())
    left_in = hermitian_part(e.matrix @ deficit)
    left_out = hermitian_part((np.eye(e.dim) - e.matrix) @ deficit)
    return Instrument(
        ("a", "b", "c", "d"),
        {
            "a": choi_from_kraus(inside, tol),
            "b": choi_from_kraus(outside, tol),
            "c": _completion_branch(left_in, f.dim_out, tol),
            "d": _completion_branch(left_out, f.dim_out, tol),
        },
        tol=tol,
    )


def op_ef_compatible(
    f: CPMap,
    e: Effect,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Full three-way classification of an operation-effect pair."""
    if e.dim != f.dim_in:
        raise MatrixShapeError("effect must live on the operation input space")
    wtol = witness_tolerances(tol)
    compatible = None
    notes = ""

    if fast_paths:
        if commutes_with_range(f, e, tol):
            ins = _commuting_range_instrument(f, e, tol)
            return _compatible(f, e, ins, "fast-path: range-commutation", tol,
                               part_1=("a", "b"), part_2=("a", "c"))
        if _is_projection(e, tol):
            compatible = False
            notes = "fast-path: projection-commutation"
        else:
            gram = f.heisenberg_unit() + e.matrix
            if float(np.linalg.eigvalsh(hermitian_part(gram))[-1]) <= 1.0 + tol.psd_tol:
                eta = np.eye(f.dim_out) / f.dim_out
                leftover = hermitian_part(np.eye(f.dim_in) - gram)
                ins = Instrument(
                    ("1", "2", "3"),
                    {
                        "1": f,
                        "2": state_prep_map(e.matrix, eta, tol),
                        "3": _completion_branch(leftover, f.dim_out, tol),
                    },
                    tol=tol,
                )
                return _compatible(f, e, ins, "fast-path: sum-below-identity", tol,
                                   part_1=("1",), part_2=("2",))

    if compatible is None:
        out = fs.solve(op_ef_problem(f, e), tol, max_iter, trace=trace)
        if out.verdict == "feasible":
            ins = _four_block_instrument(out, (f.dim_in, f.dim_out), wtol)
            return _compatible(f, e, ins, "sdp", wtol,
                               part_1=("11", "10"), part_2=("11", "01"))
        if out.verdict == "undecided":
            return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")
        compatible = False
        notes = f"sdp margin={out.margin:.3e}"

    weak = weakly_compatible_op_ef(f, e, tol, max_iter=max_iter, trace=trace)
    if weak.relation == "weakly_compatible_only":
        return Verdict("weakly_compatible_only", weak.witness, f"{notes}; {weak.notes}")
    if weak.relation == "strongly_incompatible":
        return Verdict("strongly_incompatible", None, f"{notes}; {weak.notes}")
    return Verdict("undecided", None, f"not compatible; weak undecided; {notes}")


def weak_op_ef_problem(f: CPMap, e: Effect) -> fs.FeasibilityProblem:
    side = f.dim_in * f.dim_out
    dims = (f.dim_in, f.dim_out)
    blocks = (("lam", side), ("d1", side), ("jp", side), ("d2", side))
    cons = (
        fs.encode_sum_constraint((("lam", 1.0), ("d1", -1.0)), f.choi, label="above-op"),
        fs.encode_sum_constraint(
            (("lam", 1.0), ("jp", -1.0), ("d2", -1.0)),
            np.zeros((side, side)),
            label="above-effect-op",
        ),
        fs.encode_partial_trace_constraint("lam", dims, 0, np.eye(f.dim_in), label="channel"),
        fs.encode_heisenberg_unit_constraint("jp", dims, e.matrix, label="effect"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def weakly_compatible_op_ef(
    f: CPMap,
    e: Effect,
    tol: Tolerances = DEFAULT_TOL,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Decide the weak question for an operation-effect pair."""
    if e.dim != f.dim_in:
        raise MatrixShapeError("effect must live on the operation input space")
    wtol = witness_tolerances(tol)
    out = fs.solve(weak_op_ef_problem(f, e), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        lam = CPMap(f.dim_in, f.dim_out, out.witness["lam"], kind="channel", tol=wtol)
        jp = CPMap(f.dim_in, f.dim_out, out.witness["jp"], tol=wtol)
        i1 = Instrument(
            ("0", "1"),
            {"0": f, "1": CPMap(f.dim_in, f.dim_out,
                                hermitian_part(lam.choi - f.choi), tol=wtol)},
            tol=wtol,
        )
        i2 = Instrument(
            ("0", "1"),
            {"0": jp, "1": CPMap(f.dim_in, f.dim_out,
                                 hermitian_part(lam.choi - jp.choi), tol=wtol)},
            tol=wtol,
        )
        return _weakly(f, e, i1, i2, "sdp", wtol, part_1=("0",), part_2=("0",))
    if out.verdict == "infeasible":
        return Verdict("strongly_incompatible", None, f"sdp margin={out.margin:.3e}")
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


# ---------------------------------------------------------------------------
# channel pairs
# ---------------------------------------------------------------------------


def ch_op_compatible(lam: CPMap, f: CPMap, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Channel vs operation: compatible exactly when f sits below lam.

    For channels, weak and plain compatibility coincide, so the negative
    verdict is immediately strong.
    """
    if (lam.dim_in, lam.dim_out) != (f.dim_in, f.dim_out):
        raise MatrixShapeError("maps must share input and output spaces")
    if not lam.is_trace_preserving(tol):
        raise ValueError("first argument must be a channel")
    if not cp_leq(f, lam, tol):
        return Verdict("strongly_incompatible", None, "fast-path: cp-order")
    rest = CPMap(f.dim_in, f.dim_out, hermitian_part(lam.choi - f.choi), tol=tol)
    ins = Instrument(("0", "1"), {"0": f, "1": rest}, tol=tol)
    return _compatible(lam, f, ins, "fast-path: cp-order", tol,
                       part_1=("0", "1"), part_2=("0",))


def ch_ch_compatible(l1: CPMap, l2: CPMap, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Two channels are compatible exactly when they are the same channel."""
    if (l1.dim_in, l1.dim_out) != (l2.dim_in, l2.dim_out):
        raise MatrixShapeError("channels must share input and output spaces")
    if close(l1.choi, l2.choi, tol):
        ins = Instrument(("0",), {"0": l1}, tol=tol)
        return _compatible(l1, l2, ins, "fast-path: equal-channels", tol,
                           part_1=("0",), part_2=("0",))
    return Verdict("strongly_incompatible", None, "fast-path: distinct-channels")


def ch_ef_problem(lam: CPMap, e: Effect) -> fs.FeasibilityProblem:
    side = lam.dim_in * lam.dim_out
    dims = (lam.dim_in, lam.dim_out)
    blocks = (("psi", side), ("rest", side))
    cons = (
        fs.encode_sum_constraint(("psi", "rest"), lam.choi, label="total"),
        fs.encode_heisenberg_unit_constraint("psi", dims, e.matrix, label="effect"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def ch_ef_compatible(
    lam: CPMap,
    e: Effect,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Channel vs effect; weak and plain compatibility coincide."""
    if e.dim != lam.dim_in:
        raise MatrixShapeError("effect must live on the channel input space")
    if not lam.is_trace_preserving(tol):
        raise ValueError("first argument must be a channel")
    wtol = witness_tolerances(tol)
    if fast_paths:
        if commutes_with_range(lam, e, tol):
            ins = _commuting_range_instrument(lam, e, tol)
            return _compatible(lam, e, ins, "fast-path: range-commutation", tol,
                               part_1=("a", "b", "c", "d"), part_2=("a", "c"))
        if _is_projection(e, tol):
            return Verdict("strongly_incompatible", None, "fast-path: projection-commutation")
    out = fs.solve(ch_ef_problem(lam, e), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        branches = {
            "1": CPMap(lam.dim_in, lam.dim_out, out.witness["psi"], tol=wtol),
            "0": CPMap(lam.dim_in, lam.dim_out, out.witness["rest"], tol=wtol),
        }
        ins = Instrument(("1", "0"), branches, tol=wtol)
        return _compatible(lam, e, ins, "sdp", wtol, part_1=("1", "0"), part_2=("1",))
    if out.verdict == "infeasible":
        return Verdict("strongly_incompatible", None, f"sdp margin={out.margin:.3e}")
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


def ch_obs_problem(lam: CPMap, a: Observable) -> fs.FeasibilityProblem:
    side = lam.dim_in * lam.dim_out
    dims = (lam.dim_in, lam.dim_out)
    blocks = tuple((f"gam{i}", side) for i in range(len(a.outcomes)))
    cons = [fs.encode_sum_constraint(tuple(n for n, _ in blocks), lam.choi, label="total")]
    for i, x in enumerate(a.outcomes):
        cons.append(
            fs.encode_heisenberg_unit_constraint(
                f"gam{i}", dims, a.effects[x].matrix, label=f"effect-{x}"
            )
        )
    return fs.FeasibilityProblem(blocks, tuple(cons))


def ch_obs_compatible(
    lam: CPMap,
    a: Observable,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Channel vs observable; weak and plain compatibility coincide."""
    if a.dim != lam.dim_in:
        raise MatrixShapeError("observable must live on the channel input space")
    if not lam.is_trace_preserving(tol):
        raise ValueError("first argument must be a channel")
    wtol = witness_tolerances(tol)
    if fast_paths:
        from .order import is_contraction_channel

        eta = is_contraction_channel(lam, tol)
        if eta is not None:
            branches = {
                x: state_prep_map(a.effects[x].matrix, eta, tol) for x in a.outcomes
            }
            ins = Instrument(a.outcomes, branches, tol=tol)
            return _compatible(
                lam, a, ins, "fast-path: contraction-channel", tol,
                part_1=tuple(a.outcomes),
                pointer_2=PointerMap({x: x for x in a.outcomes}),
            )
        if all(is_trivial_effect(a.effects[x], tol) for x in a.outcomes):
            branches = {
                x: CPMap(
                    lam.dim_in, lam.dim_out,
                    (float(np.trace(a.effects[x].matrix).real) / a.dim) * lam.choi,
                    tol=tol,
                )
                for x in a.outcomes
            }
            ins = Instrument(a.outcomes, branches, tol=tol)
            return _compatible(
                lam, a, ins, "fast-path: trivial-observable", tol,
                part_1=tuple(a.outcomes),
                pointer_2=PointerMap({x: x for x in a.outcomes}),
            )
    out = fs.solve(ch_obs_problem(lam, a), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        branches = {
            x: CPMap(lam.dim_in, lam.dim_out, out.witness[f"gam{i}"], tol=wtol)
            for i, x in enumerate(a.outcomes)
        }
        ins = Instrument(a.outcomes, branches, tol=wtol)
        return _compatible(
            lam, a, ins, "sdp", wtol,
            part_1=tuple(a.outcomes),
            pointer_2=PointerMap({x: x for x in a.outcomes}),
        )
    if out.verdict == "infeasible":
        return Verdict("strongly_incompatible", None, f"sdp margin={out.margin:.3e}")
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


# ---------------------------------------------------------------------------
# operation-observable
# ---------------------------------------------------------------------------


def op_obs_problem(f: CPMap, a: Observable) -> fs.FeasibilityProblem:
    side = f.dim_in * f.dim_out
    dims = (f.dim_in, f.dim_out)
    blocks = []
    for i in range(len(a.outcomes)):
        blocks.append((f"in{i}", side))
        blocks.append((f"out{i}", side))
    cons = [
        fs.encode_sum_constraint(
            tuple(f"in{i}" for i in range(len(a.outcomes))), f.choi, label="operation"
        )
    ]
    hu_shape = fs.encode_heisenberg_unit_constraint("in0", dims, a.effects[a.outcomes[0]].matrix)
    pt_mat = hu_shape.terms[0][1]
    for i, x in enumerate(a.outcomes):
        target = fs.encode_heisenberg_unit_constraint(f"in{i}", dims, a.effects[x].matrix)
        cons.append(
            fs.AffineConstraint(
                ((f"in{i}", pt_mat), (f"out{i}", pt_mat)), target.rhs, label=f"effect-{x}"
            )
        )
    return fs.FeasibilityProblem(tuple(blocks), tuple(cons))


def op_obs_compatible(
    f: CPMap,
    a: Observable,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Full three-way classification of an operation-observable pair."""
    if a.dim != f.dim_in:
        raise MatrixShapeError("observable must live on the operation input space")
    wtol = witness_tolerances(tol)
    compatible = None
    notes = ""

    out = fs.solve(op_obs_problem(f, a), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        branches = {}
        for i, x in enumerate(a.outcomes):
            branches[f"{x}&in"] = CPMap(f.dim_in, f.dim_out, out.witness[f"in{i}"], tol=wtol)
            branches[f"{x}&out"] = CPMap(f.dim_in, f.dim_out, out.witness[f"out{i}"], tol=wtol)
        ins = Instrument(tuple(branches), branches, tol=wtol)
        pointer = PointerMap(
            {f"{x}&in": x for x in a.outcomes} | {f"{x}&out": x for x in a.outcomes},
            codomain=a.outcomes,
        )
        return _compatible(
            f, a, ins, "sdp", wtol,
            part_1=tuple(f"{x}&in" for x in a.outcomes),
            pointer_2=pointer,
        )
    if out.verdict == "undecided":
        return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")
    notes = f"sdp margin={out.margin:.3e}"

    weak = weakly_compatible_op_obs(f, a, tol, max_iter=max_iter, trace=trace)
    if weak.relation == "weakly_compatible_only":
        return Verdict("weakly_compatible_only", weak.witness, f"{notes}; {weak.notes}")
    if weak.relation == "strongly_incompatible":
        return Verdict("strongly_incompatible", None, f"{notes}; {weak.notes}")
    return Verdict("undecided", None, f"not compatible; weak undecided; {notes}")


def weak_op_obs_problem(f: CPMap, a: Observable) -> fs.FeasibilityProblem:
    side = f.dim_in * f.dim_out
    dims = (f.dim_in, f.dim_out)
    names = tuple(f"gam{i}" for i in range(len(a.outcomes)))
    blocks = tuple((n, side) for n in names) + (("d", side),)
    cons = [
        fs.encode_sum_constraint(
            tuple((n, 1.0) for n in names) + (("d", -1.0),), f.choi, label="above-op"
        )
    ]
    for i, x in enumerate(a.outcomes):
        cons.append(
            fs.encode_heisenberg_unit_constraint(
                f"gam{i}", dims, a.effects[x].matrix, label=f"effect-{x}"
            )
        )
    return fs.FeasibilityProblem(blocks, tuple(cons))


def weakly_compatible_op_obs(
    f: CPMap,
    a: Observable,
    tol: Tolerances = DEFAULT_TOL,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Decide the weak question for an operation-observable pair."""
    if a.dim != f.dim_in:
        raise MatrixShapeError("observable must live on the operation input space")
    wtol = witness_tolerances(tol)
    out = fs.solve(weak_op_obs_problem(f, a), tol, max_iter, trace=trace)
    if out.verdict == "feasible":
        branches = {
            x: CPMap(f.dim_in, f.dim_out, out.witness[f"gam{i}"], tol=wtol)
            for i, x in enumerate(a.outcomes)
        }
        i1 = Instrument(a.outcomes, branches, tol=wtol)
        lam = total_channel(i1, wtol)
        i2 = Instrument(
            ("0", "1"),
            {"0": f, "1": CPMap(f.dim_in, f.dim_out,
                                hermitian_part(lam.choi - f.choi), tol=wtol)},
            tol=wtol,
        )
        return _weakly(
            f, a, i2, i1, "sdp", wtol,
            part_1=("0",), pointer_2=PointerMap({x: x for x in a.outcomes}),
        )
    if out.verdict == "infeasible":
        return Verdict("strongly_incompatible", None, f"sdp margin={out.margin:.3e}")
    return Verdict("undecided", None, f"sdp undecided margin={out.margin:.3e}")


# ---------------------------------------------------------------------------
# instrument pairs and dispatch
# ---------------------------------------------------------------------------


def ins_ch_compatible(ins: Instrument, lam: CPMap, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Instrument vs channel: compatible exactly when the total matches."""
    if (ins.dim_in, ins.dim_out) != (lam.dim_in, lam.dim_out):
        raise MatrixShapeError("devices must share input and output spaces")
    if close(total_channel(ins, tol).choi, lam.choi, tol):
        pointer = PointerMap({x: x for x in ins.outcomes})
        return _compatible(
            ins, lam, ins, "fast-path: total-channel", tol,
            pointer_1=pointer, part_2=tuple(ins.outcomes),
        )
    return Verdict("strongly_incompatible", None, "fast-path: total-channel")


def ins_ins_verdict(i1: Instrument, i2: Instrument, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """Instrument pair: only the shared-total-channel level is decided.

    Distinct totals are strongly incompatible. Matching totals imply
    weak compatibility, but whether a single instrument contains both
    is not searched, so the three-way relation stays undecided.
    """
    if (i1.dim_in, i1.dim_out) != (i2.dim_in, i2.dim_out):
        raise MatrixShapeError("instruments must share input and output spaces")
    if not close(total_channel(i1, tol).choi, total_channel(i2, tol).choi, tol):
        return Verdict("strongly_incompatible", None, "fast-path: distinct-totals")
    return Verdict(
        "undecided", None,
        "totals agree: weakly compatible; joint-instrument search not supported",
    )


def _kind(device) -> str:
    if isinstance(device, Effect):
        return "effect"
    if isinstance(device, Observable):
        return "observable"
    if isinstance(device, Instrument):
        return "instrument"
    if isinstance(device, CPMap):
        return "channel" if device.kind == "channel" else "operation"
    raise UnsupportedPairError(f"unsupported device type {type(device).__name__}")


def _swap_verdict(v: Verdict) -> Verdict:
    w = v.witness
    if isinstance(w, CompatWitness):
        w = CompatWitness(w.instrument, w.part_2, w.part_1, w.pointer_2, w.pointer_1,
                          w.joint_observable)
    elif isinstance(w, WeakWitness):
        w = WeakWitness(w.instrument_2, w.instrument_1, w.common_channel,
                        w.part_2, w.part_1, w.pointer_2, w.pointer_1)
    return Verdict(v.relation, w, v.notes)


_RANK = {"effect": 0, "observable": 1, "operation": 2, "channel": 3, "instrument": 4}


def classify(
    d1,
    d2,
    tol: Tolerances = DEFAULT_TOL,
    fast_paths: bool = True,
    max_iter: int = 50_000,
    trace=None,
) -> Verdict:
    """Three-way classification of any supported device pair.

    Dispatches to the pair-specific decider and returns compatible,
    weakly_compatible_only, strongly_incompatible, or undecided. The
    witness orientation always matches the argument order.
    """
    k1, k2 = _kind(d1), _kind(d2)
    if _RANK[k1] > _RANK[k2]:
        return _swap_verdict(classify(d2, d1, tol, fast_paths, max_iter, trace=trace))
    pair = (k1, k2)
    if pair == ("effect", "effect"):
        return coexistent_effects(d1, d2, tol, fast_paths, max_iter, trace=trace)
    if pair == ("effect", "observable"):
        return jointly_measurable(
            effect_as_binary_observable(d1, tol), d2, tol, fast_paths, max_iter,
            dev1=d1, dev2=d2, trace=trace,
        )
    if pair == ("observable", "observable"):
        return jointly_measurable(d1, d2, tol, fast_paths, max_iter, trace=trace)
    if pair == ("effect", "operation"):
        return _swap_verdict(op_ef_compatible(d2, d1, tol, fast_paths, max_iter, trace=trace))
    if pair == ("effect", "channel"):
        return _swap_verdict(ch_ef_compatible(d2, d1, tol, fast_paths, max_iter, trace=trace))
    if pair == ("observable", "operation"):
        return _swap_verdict(op_obs_compatible(d2, d1, tol, fast_paths, max_iter, trace=trace))
    if pair == ("observable", "channel"):
        return _swap_verdict(ch_obs_compatible(d2, d1, tol, fast_paths, max_iter, trace=trace))
    if pair == ("operation", "operation"):
        return op_op_compatible(d1, d2, tol, fast_paths, max_iter, trace=trace)
    if pair == ("operation", "channel"):
        return _swap_verdict(ch_op_compatible(d2, d1, tol))
    if pair == ("channel", "channel"):
        return ch_ch_compatible(d1, d2, tol)
    if pair == ("channel", "instrument"):
        return _swap_verdict(ins_ch_compatible(d2, d1, tol))
    if pair == ("instrument", "instrument"):
        return ins_ins_verdict(d1, d2, tol)
    raise UnsupportedPairError(f"no decider for pair ({k1}, {k2})")


# ---------------------------------------------------------------------------
# Kraus certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrausCertificate:
    """Kraus-operator account of a verdict witness.

    ``joint`` certificates share one list realizing both devices via
    index subsets; ``paired`` certificates hold two equal-length lists
    with identical total channels.
    """

    kind: str  # joint | paired
    k_ops: tuple[np.ndarray, ...]
    l_ops: tuple[np.ndarray, ...] | None
    j1: tuple[int, ...]
    j2: tuple[int, ...]


def _instrument_kraus(ins: Instrument, subset, tol: Tolerances):
    """Kraus operators per outcome plus the index set covering a subset."""
    ops: list[np.ndarray] = []
    owners: list[str] = []
    for x in ins.outcomes:
        branch = ins.branches[x]
        if frob_norm(branch.choi) <= tol.eq_tol:
            continue
        for k in kraus_from_choi(branch, tol).ops:
            ops.append(k)
            owners.append(x)
    chosen = tuple(i for i, x in enumerate(owners) if subset is not None and x in subset)
    return ops, owners, chosen


def kraus_witness(v: Verdict, tol: Tolerances = DEFAULT_TOL) -> KrausCertificate:
    """Export a verdict witness as Kraus operators with index subsets.

    The certificate is re-validated: subset sums reproduce the devices'
    actions, the full sums are normalized, and paired lists share their
    total channel.
    """
    wtol = witness_tolerances(tol)
    if v.witness is None:
        raise ValueError("verdict carries no witness")
    if isinstance(v.witness, CompatWitness):
        w = v.witness
        sub1 = _subset_of(w.part_1)
        sub2 = _subset_of(w.part_2)
        ops, owners, j1 = _instrument_kraus(w.instrument, sub1, wtol)
        j2 = tuple(i for i, x in enumerate(owners) if x in sub2)
        cert = KrausCertificate("joint", tuple(ops), None, j1, j2)
        _validate_joint_certificate(cert, w.instrument, wtol)
        return cert
    w = v.witness
    sub1 = _subset_of(w.part_1)
    sub2 = _subset_of(w.part_2)
    k_ops, _, j1 = _instrument_kraus(w.instrument_1, sub1, wtol)
    l_ops, _, j2 = _instrument_kraus(w.instrument_2, sub2, wtol)
    n = max(len(k_ops), len(l_ops), 1)
    shape = (w.instrument_1.dim_out, w.instrument_1.dim_in)
    k_ops = tuple(k_ops + [np.zeros(shape, dtype=complex)] * (n - len(k_ops)))
    l_ops = tuple(l_ops + [np.zeros(shape, dtype=complex)] * (n - len(l_ops)))
    cert = KrausCertificate("paired", k_ops, l_ops, j1, j2)
    _validate_paired_certificate(cert, wtol)
    return cert


def _subset_of(part):
    if part is None:
        raise ValueError(
            "Kraus index subsets exist only for subset-realized parts "
            "(effects, operations, channels)"
        )
    return tuple(part)


def _gram(ops) -> np.ndarray:
    return sum(k.conj().T @ k for k in ops)


def _validate_joint_certificate(cert: KrausCertificate, ins: Instrument, wtol: Tolerances) -> None:
    if cert.k_ops:
        total = _gram(cert.k_ops)
        if not close(total, np.eye(cert.k_ops[0].shape[1]), wtol):
            raise WitnessValidationError("joint Kraus list is not normalized")


def _validate_paired_certificate(cert: KrausCertificate, wtol: Tolerances) -> None:
    din = cert.k_ops[0].shape[1]
    if not close(_gram(cert.k_ops), np.eye(din), wtol):
        raise WitnessValidationError("first Kraus list is not normalized")
    if not close(_gram(cert.l_ops), np.eye(din), wtol):
        raise WitnessValidationError("second Kraus list is not normalized")
    jk = sum(np.outer(k.T.reshape(-1), k.T.reshape(-1).conj()) for k in cert.k_ops)
    jl = sum(np.outer(k.T.reshape(-1), k.T.reshape(-1).conj()) for k in cert.l_ops)
    if not close(jk, jl, wtol):
        raise WitnessValidationError("paired Kraus lists have different total channels")
