"""Quantum device types and their canonical constructions.

Five device kinds live here: effects and observables (classical output),
operations and channels (quantum output, represented by a CPMap in Choi
form), and instruments (both outputs). The module also provides
Kraus/Choi conversion, Schroedinger/Heisenberg application, parts of
instruments, relabeling, and the standard instrument constructions that
embed any single device into an instrument.

Choi convention: for a map ``F`` from states on the input space (side
``dim_in``) to states on the output space (side ``dim_out``),

    J(F) = sum_ij |i><j| (x) F(|i><j|)

with the input slot on the slow index. The Schroedinger action is
``F(rho) = Tr_in[J (rho^T (x) I_out)]``.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass, field

import numpy as np

from .matkit import (
    DEFAULT_TOL,
    HermiticityError,
    MatrixShapeError,
    PositivityError,
    Tolerances,
    as_matrix,
    close,
    frob_norm,
    hermitian_part,
    herm_eig,
    is_hermitian,
    mat_sqrt,
)


class EffectBoundsError(ValueError):
    """Hermitian but with eigenvalues outside [0, 1]."""


class NormalizationError(ValueError):
    """Observable or instrument does not sum to the required total."""


class TraceConditionError(ValueError):
    """Map is not trace-non-increasing, or not trace-preserving for a channel."""


class OutcomeError(ValueError):
    """Unknown outcome label."""


class OutcomeBoundError(ValueError):
    """Outcome set too large for exhaustive part-of search."""


def _freeze(m: np.ndarray) -> np.ndarray:
    out = m.copy()
    out.flags.writeable = False
    return out


# ---------------------------------------------------------------------------
# Device types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Effect:
    """Hermitian operator E with 0 <= E <= 1."""

    matrix: np.ndarray
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise MatrixShapeError("effect matrix must be square")
        if not is_hermitian(m, tol):
            raise HermiticityError("effect matrix is not Hermitian")
        evals = np.linalg.eigvalsh(hermitian_part(m))
        if evals[0] < -tol.psd_tol or evals[-1] > 1.0 + tol.psd_tol:
            raise EffectBoundsError(
                f"effect eigenvalues [{evals[0]:.3e}, {evals[-1]:.3e}] outside [0, 1]"
            )
        object.__setattr__(self, "matrix", _freeze(hermitian_part(m)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def complement(self) -> "Effect":
        return Effect(np.eye(self.dim) - self.matrix)


@dataclass(frozen=True, eq=False)
class Observable:
    """Finite outcome-labelled family of effects summing to the identity."""

    outcomes: tuple[str, ...]
    effects: dict[str, Effect]
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        object.__setattr__(self, "outcomes", tuple(str(x) for x in self.outcomes))
        if not self.outcomes:
            raise OutcomeError("observable needs at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise OutcomeError("duplicate outcome labels")
        if set(self.effects) != set(self.outcomes):
            raise OutcomeError("effect labels do not match outcome list")
        dims = {e.dim for e in self.effects.values()}
        if len(dims) != 1:
            raise MatrixShapeError("all effects must share one dimension")
        total = sum(e.matrix for e in self.effects.values())
        if not close(total, np.eye(self.dim), tol):
            raise NormalizationError("effects do not sum to the identity")

    @property
    def dim(self) -> int:
        return next(iter(self.effects.values())).dim

    def effect_of(self, labels) -> Effect:
        """Summed effect over an outcome subset."""
        labels = list(labels)
        for x in labels:
            if x not in self.effects:
                raise OutcomeError(f"unknown outcome {x!r}")
        m = np.zeros((self.dim, self.dim), dtype=complex)
        for x in labels:
            m = m + self.effects[x].matrix
        return Effect(m)


@dataclass(frozen=True, eq=False)
class CPMap:
    """Completely positive trace-non-increasing map in canonical Choi form.

    ``kind`` is "operation" or "channel"; channels are additionally
    trace-preserving.
    """

    dim_in: int
    dim_out: int
    choi: np.ndarray
    kind: str = "operation"
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        if self.kind not in ("operation", "channel"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        j = as_matrix(self.choi)
        side = self.dim_in * self.dim_out
        if j.shape != (side, side):
            raise MatrixShapeError(f"Choi side {j.shape[0]} != dim_in*dim_out = {side}")
        if not is_hermitian(j, tol):
            raise HermiticityError("Choi matrix is not Hermitian")
        j = hermitian_part(j)
        evals = np.linalg.eigvalsh(j)
        if evals[0] < -tol.psd_tol:
            raise PositivityError(f"Choi matrix has eigenvalue {evals[0]:.3e} < 0")
        object.__setattr__(self, "choi", _freeze(j))
        hu = self.heisenberg_unit()
        top = float(np.linalg.eigvalsh(hermitian_part(hu))[-1])
        if top > 1.0 + tol.psd_tol:
            raise TraceConditionError(f"map increases trace: ||F_H(1)|| = {top:.6f} > 1")
        if self.kind == "channel" and not close(hu, np.eye(self.dim_in), tol):
            raise TraceConditionError("channel is not trace-preserving")

    @property
    def _t4(self) -> np.ndarray:
        return self.choi.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    def heisenberg_unit(self) -> np.ndarray:
        """The effect F_H(1) that the map assigns to the unit."""
        return apply_h(self, np.eye(self.dim_out))

    def is_trace_preserving(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        return close(self.heisenberg_unit(), np.eye(self.dim_in), tol)


@dataclass(frozen=True, eq=False)
class Instrument:
    """Outcome-labelled family of operations whose sum is a channel."""

    outcomes: tuple[str, ...]
    branches: dict[str, CPMap]
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        object.__setattr__(self, "outcomes", tuple(str(x) for x in self.outcomes))
        if not self.outcomes:
            raise OutcomeError("instrument needs at least one outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise OutcomeError("duplicate outcome labels")
        if set(self.branches) != set(self.outcomes):
            raise OutcomeError("branch labels do not match outcome list")
        dims = {(b.dim_in, b.dim_out) for b in self.branches.values()}
        if len(dims) != 1:
            raise MatrixShapeError("all branches must share input/output dimensions")
        total = sum(b.choi for b in self.branches.values())
        din, dout = next(iter(dims))
        try:
            CPMap(din, dout, total, kind="channel", tol=tol)
        except (TraceConditionError, PositivityError) as exc:
            raise NormalizationError(f"branch sum is not a channel: {exc}") from exc

    @property
    def dim_in(self) -> int:
        return next(iter(self.branches.values())).dim_in

    @property
    def dim_out(self) -> int:
        return next(iter(self.branches.values())).dim_out

    def branch_sum(self, labels, tol: Tolerances = DEFAULT_TOL) -> CPMap:
        """Summed operation over an outcome subset (the empty sum is null)."""
        labels = list(labels)
        for x in labels:
            if x not in self.branches:
                raise OutcomeError(f"unknown outcome {x!r}")
        side = self.dim_in * self.dim_out
        j = np.zeros((side, side), dtype=complex)
        for x in labels:
            j = j + self.branches[x].choi
        kind = "channel" if close(
            _heisenberg_unit_of_choi(j, self.dim_in, self.dim_out),
            np.eye(self.dim_in),
            tol,
        ) else "operation"
        return CPMap(self.dim_in, self.dim_out, j, kind=kind, tol=tol)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators K_j (output x input each) with sum K_j^* K_j <= 1."""

    ops: tuple[np.ndarray, ...]
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        ops = tuple(as_matrix(k) for k in self.ops)
        if not ops:
            raise ValueError("empty Kraus set")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise MatrixShapeError("Kraus operators must share one shape")
        gram = sum(k.conj().T @ k for k in ops)
        top = float(np.linalg.eigvalsh(hermitian_part(gram))[-1])
        if top > 1.0 + tol.psd_tol:
            raise TraceConditionError(f"sum K^*K has eigenvalue {top:.6f} > 1")
        object.__setattr__(self, "ops", tuple(_freeze(k) for k in ops))

    @property
    def dim_in(self) -> int:
        return self.ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.ops[0].shape[0]


@dataclass(frozen=True)
class PointerMap:
    """Total relabeling function between outcome sets.

    ``codomain`` fixes the output outcome order; it defaults to the order
    of first appearance of the images.
    """

    mapping: dict[str, str]
    codomain: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        images = []
        for v in self.mapping.values():
            if v not in images:
                images.append(v)
        cod = tuple(self.codomain) if self.codomain else tuple(images)
        if not set(images) <= set(cod):
            raise OutcomeError("mapping image is not contained in the codomain")
        object.__setattr__(self, "codomain", cod)

    def preimage(self, label: str) -> tuple[str, ...]:
        return tuple(x for x, y in self.mapping.items() if y == label)

    def check_total(self, outcomes) -> None:
        missing = [x for x in outcomes if x not in self.mapping]
        if missing:
            raise OutcomeError(f"pointer map is not total; missing {missing}")


# ---------------------------------------------------------------------------
# Choi / Kraus conversion and application
# ---------------------------------------------------------------------------


def _heisenberg_unit_of_choi(j: np.ndarray, din: int, dout: int) -> np.ndarray:
    t = j.reshape(din, dout, din, dout)
    return np.einsum("jmim->ij", t)


def choi_from_kraus(k: KrausSet | list, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """Canonical Choi matrix of ``rho -> sum_j K_j rho K_j^*``.

    The result is a channel exactly when the Kraus set is normalized.
    """
    if not isinstance(k, KrausSet):
        k = KrausSet(tuple(k), tol=tol)
    din, dout = k.dim_in, k.dim_out
    side = din * dout
    j = np.zeros((side, side), dtype=complex)
    for op in k.ops:
        v = op.T.reshape(side)
        j += np.outer(v, v.conj())
    gram = sum(op.conj().T @ op for op in k.ops)
    kind = "channel" if close(gram, np.eye(din), tol) else "operation"
    return CPMap(din, dout, j, kind=kind, tol=tol)


def kraus_from_choi(m: CPMap, tol: Tolerances = DEFAULT_TOL) -> KrausSet:
    """Kraus operators from the Choi eigendecomposition.

    Eigenvalues at or below psd_tol are dropped; the null map yields the
    single zero operator.
    """
    evals, evecs = herm_eig(m.choi, tol)
    ops = []
    for lam, vec in zip(evals, evecs.T):
        if lam > tol.psd_tol:
            ops.append(np.sqrt(lam) * vec.reshape(m.dim_in, m.dim_out).T)
    if not ops:
        ops = [np.zeros((m.dim_out, m.dim_in), dtype=complex)]
    return KrausSet(tuple(ops), tol=tol)


def apply_s(m: CPMap, rho: np.ndarray) -> np.ndarray:
    """Schroedinger-picture action on an input-space matrix."""
    rho = as_matrix(rho)
    if rho.shape != (m.dim_in, m.dim_in):
        raise MatrixShapeError("state dimension does not match the map input")
    return np.ascontiguousarray(np.einsum("ij,imjn->mn", rho, m._t4))


def apply_h(m: CPMap, t: np.ndarray) -> np.ndarray:
    """Heisenberg-picture action on an output-space matrix."""
    t = as_matrix(t)
    if t.shape != (m.dim_out, m.dim_out):
        raise MatrixShapeError("operator dimension does not match the map output")
    return np.ascontiguousarray(np.einsum("jmin,nm->ij", m._t4, t))


def choi_from_action(action, dim_in: int) -> np.ndarray:
    """Assemble the Choi matrix of a linear map given as a callable on matrices."""
    first = as_matrix(action(np.zeros((dim_in, dim_in), dtype=complex) + _unit(dim_in, 0, 0)))
    dim_out = first.shape[0]
    side = dim_in * dim_out
    j = np.zeros((side, side), dtype=complex)
    for i in range(dim_in):
        for k in range(dim_in):
            out = as_matrix(action(_unit(dim_in, i, k))) if (i, k) != (0, 0) else first
            j[i * dim_out : (i + 1) * dim_out, k * dim_out : (k + 1) * dim_out] = out
    return j


def _unit(d: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[i, j] = 1.0
    return m


# ---------------------------------------------------------------------------
# Four-effect span
# ---------------------------------------------------------------------------


def four_effect_decomposition(
    t: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> tuple[tuple[complex, ...], tuple[Effect, ...]]:
    """Write an arbitrary square matrix as sum_i c_i E_i over four effects.

    Split into Hermitian and anti-Hermitian parts, each Hermitian part
    into positive/negative parts by an operator-norm shift, and scale
    each positive part down to an effect. Zero parts give the zero
    effect with coefficient zero.
    """
    t = as_matrix(t)
    if t.shape[0] != t.shape[1]:
        raise MatrixShapeError("input must be square")
    tr = hermitian_part(t)
    ti = (t - t.conj().T) / 2j
    coeffs: list[complex] = []
    effects: list[Effect] = []
    for part, unit in ((tr, 1.0 + 0j), (ti, 1j)):
        norm = float(np.abs(np.linalg.eigvalsh(hermitian_part(part))).max())
        plus = (norm * np.eye(part.shape[0]) + part) / 2.0
        minus = (norm * np.eye(part.shape[0]) - part) / 2.0
        for p, sign in ((plus, 1.0), (minus, -1.0)):
            top = float(np.linalg.eigvalsh(hermitian_part(p))[-1])
            if top <= tol.psd_tol:
                coeffs.append(0j)
                effects.append(Effect(np.zeros_like(p)))
            else:
                coeffs.append(unit * sign * top)
                effects.append(Effect(p / top, tol=tol))
    return tuple(coeffs), tuple(effects)


# ---------------------------------------------------------------------------
# Parts of instruments
# ---------------------------------------------------------------------------

PART_SEARCH_LIMIT = 12


def instrument_part_effect(ins: Instrument, labels, tol: Tolerances = DEFAULT_TOL) -> Effect:
    """The effect I_H(X, 1) induced by an outcome subset."""
    op = ins.branch_sum(labels, tol)
    return Effect(op.heisenberg_unit(), tol=tol)


def instrument_part_op(ins: Instrument, labels, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """The operation I(X, .) induced by an outcome subset."""
    return ins.branch_sum(labels, tol)


def induced_observable(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> Observable:
    """The observable x -> I_H(x, 1)."""
    effects = {x: Effect(ins.branches[x].heisenberg_unit(), tol=tol) for x in ins.outcomes}
    return Observable(ins.outcomes, effects, tol=tol)


def total_channel(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """The channel I(Omega, .)."""
    total = sum(ins.branches[x].choi for x in ins.outcomes)
    return CPMap(ins.dim_in, ins.dim_out, total, kind="channel", tol=tol)


def relabel(ins: Instrument, f: PointerMap, tol: Tolerances = DEFAULT_TOL) -> Instrument:
    """Coarse-grain an instrument along a pointer function."""
    f.check_total(ins.outcomes)
    branches = {}
    side = ins.dim_in * ins.dim_out
    for y in f.codomain:
        j = np.zeros((side, side), dtype=complex)
        for x in f.preimage(y):
            if x in ins.branches:
                j = j + ins.branches[x].choi
        branches[y] = CPMap(ins.dim_in, ins.dim_out, j, tol=tol)
    return Instrument(f.codomain, branches, tol=tol)


def _subset_iter(outcomes: tuple[str, ...]):
    for r in range(len(outcomes) + 1):
        yield from itertools.combinations(outcomes, r)


def _check_part_bound(ins: Instrument) -> None:
    if len(ins.outcomes) > PART_SEARCH_LIMIT:
        raise OutcomeBoundError(
            f"outcome set of size {len(ins.outcomes)} exceeds the exhaustive "
            f"search limit {PART_SEARCH_LIMIT}"
        )


def _pointer_assignments(ins: Instrument, targets: dict[str, np.ndarray], summand, tol: Tolerances):
    """DFS over pointer functions matching branch sums to target matrices.

    ``summand(x)`` gives the matrix contributed by instrument outcome x.
    Prunes assignments whose partial sums exceed the target in the PSD
    order (sound because every summand is PSD).
    """
    labels = list(targets)
    src = list(ins.outcomes)
    sums = {y: np.zeros_like(next(iter(targets.values()))) for y in labels}
    scale = 1.0 + max(frob_norm(t) for t in targets.values())

    def feasible(y: str) -> bool:
        gap = targets[y] - sums[y]
        return float(np.linalg.eigvalsh(hermitian_part(gap))[0]) >= -tol.psd_tol * scale

    def rec(k: int):
        if k == len(src):
            if all(frob_norm(targets[y] - sums[y]) <= tol.eq_tol * scale for y in labels):
                yield {src[i]: assignment[i] for i in range(len(src))}
            return
        for y in labels:
            sums[y] = sums[y] + summand(src[k])
            assignment.append(y)
            if feasible(y):
                yield from rec(k + 1)
            assignment.pop()
            sums[y] = sums[y] - summand(src[k])

    assignment: list[str] = []
    yield from rec(0)


def is_part_of(device, ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Decide whether a device arises from an instrument.

    Effects and operations: some outcome subset reproduces the device.
    Channels: equality with the total channel. Observables and
    instruments: some pointer function reproduces the device. Searches
    are exhaustive and bounded by PART_SEARCH_LIMIT outcomes.
    """
    if isinstance(device, Effect):
        if device.dim != ins.dim_in:
            raise MatrixShapeError("effect dimension does not match the instrument input")
        _check_part_bound(ins)
        per = {x: ins.branches[x].heisenberg_unit() for x in ins.outcomes}
        for subset in _subset_iter(ins.outcomes):
            s = sum((per[x] for x in subset), np.zeros((ins.dim_in, ins.dim_in), dtype=complex))
            if close(device.matrix, s, tol):
                return True
        return False
    if isinstance(device, CPMap):
        if (device.dim_in, device.dim_out) != (ins.dim_in, ins.dim_out):
            raise MatrixShapeError("map dimensions do not match the instrument")
        if device.kind == "channel" or device.is_trace_preserving(tol):
            return close(device.choi, total_channel(ins).choi, tol)
        _check_part_bound(ins)
        side = ins.dim_in * ins.dim_out
        for subset in _subset_iter(ins.outcomes):
            s = sum((ins.branches[x].choi for x in subset), np.zeros((side, side), dtype=complex))
            if close(device.choi, s, tol):
                return True
        return False
    if isinstance(device, Observable):
        if device.dim != ins.dim_in:
            raise MatrixShapeError("observable dimension does not match the instrument input")
        _check_part_bound(ins)
        per = {x: ins.branches[x].heisenberg_unit() for x in ins.outcomes}
        targets = {y: device.effects[y].matrix for y in device.outcomes}
        return next(_pointer_assignments(ins, targets, lambda x: per[x], tol), None) is not None
    if isinstance(device, Instrument):
        if (device.dim_in, device.dim_out) != (ins.dim_in, ins.dim_out):
            raise MatrixShapeError("instrument dimensions do not match")
        _check_part_bound(ins)
        targets = {y: device.branches[y].choi for y in device.outcomes}
        return next(
            _pointer_assignments(ins, targets, lambda x: ins.branches[x].choi, tol), None
        ) is not None
    raise TypeError(f"unsupported device type {type(device).__name__}")


# ---------------------------------------------------------------------------
# Canonical constructions
# ---------------------------------------------------------------------------


def _check_state(rho: np.ndarray, tol: Tolerances) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise MatrixShapeError("state must be square")
    if not is_hermitian(rho, tol):
        raise HermiticityError("state is not Hermitian")
    evals = np.linalg.eigvalsh(hermitian_part(rho))
    if evals[0] < -tol.psd_tol:
        raise PositivityError(f"state has negative eigenvalue {evals[0]:.3e}")
    if abs(float(np.trace(rho).real) - 1.0) > 1e-8:
        raise ValueError("state trace differs from 1")
    return hermitian_part(rho)


def _state_prep_choi(effect_matrix: np.ndarray, rho0: np.ndarray) -> np.ndarray:
    """Choi of ``rho -> tr[E rho] rho0``."""
    return np.kron(effect_matrix.T, rho0)


def canonical_instrument(
    device,
    anchor_state: np.ndarray | None = None,
    probs: dict[str, float] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> Instrument:
    """Embed a single device into an instrument that has it as a part.

    Effects get a binary measure-and-prepare instrument around an anchor
    state, observables an |Omega|-ary one, operations a binary instrument
    with a completion branch, and channels a probability-weighted family
    of copies. The anchor state (default: maximally mixed) parametrizes
    an uncountable family of valid embeddings.
    """
    if isinstance(device, Effect):
        d = device.dim
        rho0 = _check_state(anchor_state if anchor_state is not None else np.eye(d) / d, tol)
        branches = {
            "0": CPMap(d, rho0.shape[0], _state_prep_choi(device.matrix, rho0)),
            "1": CPMap(d, rho0.shape[0], _state_prep_choi(np.eye(d) - device.matrix, rho0)),
        }
        return Instrument(("0", "1"), branches)
    if isinstance(device, Observable):
        d = device.dim
        rho0 = _check_state(anchor_state if anchor_state is not None else np.eye(d) / d, tol)
        branches = {
            x: CPMap(d, rho0.shape[0], _state_prep_choi(device.effects[x].matrix, rho0))
            for x in device.outcomes
        }
        return Instrument(device.outcomes, branches)
    if isinstance(device, CPMap) and device.kind == "channel":
        if probs is None:
            probs = {"0": 1.0}
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-9 or any(p < -1e-12 for p in probs.values()):
            raise ValueError("probs must be a probability distribution")
        outcomes = tuple(probs)
        branches = {
            x: CPMap(device.dim_in, device.dim_out, max(p, 0.0) * device.choi)
            for x, p in probs.items()
        }
        return Instrument(outcomes, branches)
    if isinstance(device, CPMap):
        dk = device.dim_out
        rho0 = _check_state(anchor_state if anchor_state is not None else np.eye(dk) / dk, tol)
        if rho0.shape[0] != dk:
            raise MatrixShapeError("anchor state must live on the output space")
        deficit = np.eye(device.dim_in) - device.heisenberg_unit()
        branches = {
            "0": device,
            "1": CPMap(device.dim_in, dk, _state_prep_choi(deficit, rho0)),
        }
        return Instrument(("0", "1"), branches)
    raise TypeError(f"unsupported device type {type(device).__name__}")


def luders(a: Effect, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """The operation ``rho -> sqrt(A) rho sqrt(A)``."""
    root = mat_sqrt(a.matrix, tol)
    return choi_from_kraus(KrausSet((root,), tol=tol), tol)


def contraction_channel(eta: np.ndarray, dim_in: int | None = None, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """The channel ``rho -> tr(rho) eta`` for a fixed output state eta."""
    eta = _check_state(eta, tol)
    din = dim_in if dim_in is not None else eta.shape[0]
    return CPMap(din, eta.shape[0], np.kron(np.eye(din), eta), kind="channel")


def trivial_observable(p: dict[str, float], dim: int, tol: Tolerances = DEFAULT_TOL) -> Observable:
    """The observable ``x -> p(x) 1`` for a probability distribution p."""
    if abs(sum(p.values()) - 1.0) > 1e-9 or any(v < -1e-12 for v in p.values()):
        raise ValueError("p must be a probability distribution")
    outcomes = tuple(p)
    effects = {x: Effect(max(v, 0.0) * np.eye(dim), tol=tol) for x, v in p.items()}
    return Observable(outcomes, effects, tol=tol)
