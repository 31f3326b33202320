"""Measurement models: probe state, coupling unitary, pointer observable.

A model realizes an instrument physically: couple the system to a probe
via a unitary, then read a pointer observable on the outgoing ancilla.
This module evaluates outcome probabilities and conditional post-states,
induces the instrument belonging to a model, synthesizes a
finite-dimensional model for any instrument, and builds pairs of models
that differ only in their pointer observables -- the operational face
of weak compatibility.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .devices import (
    CPMap,
    Effect,
    Instrument,
    Observable,
    PointerMap,
    choi_from_action,
    is_part_of,
    total_channel,
)
from .dilation import minimal_stinespring, rn_observable
from .matkit import (
    DEFAULT_TOL,
    MatrixShapeError,
    Tolerances,
    as_matrix,
    close,
    hermitian_part,
    is_hermitian,
    kron,
)


class ModelSynthesisError(AssertionError):
    """A synthesized model failed to reproduce its instrument."""


class TotalMismatchError(ValueError):
    """Instruments do not share a total channel."""


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Quintuple (V1, V2, eta, U, pointer) coupling a system to a probe.

    ``u`` maps (input system) (x) V1 unitarily onto (output system) (x) V2;
    ``eta`` is the probe state on V1 and the pointer observable lives on
    V2. Input/output system sides are explicit because the unitary's
    shape alone does not determine them.
    """

    dim_in: int
    dim_out: int
    dim_v1: int
    dim_v2: int
    eta: np.ndarray
    u: np.ndarray
    pointer: Observable
    tol: InitVar[Tolerances | None] = None

    def __post_init__(self, tol: Tolerances | None) -> None:
        tol = tol or DEFAULT_TOL
        side = self.dim_in * self.dim_v1
        if side != self.dim_out * self.dim_v2:
            raise MatrixShapeError("dim_in * dim_v1 must equal dim_out * dim_v2")
        u = as_matrix(self.u)
        if u.shape != (side, side):
            raise MatrixShapeError(f"unitary must have side {side}")
        eye = np.eye(side)
        if not (close(u @ u.conj().T, eye, tol) and close(u.conj().T @ u, eye, tol)):
            raise ValueError("coupling matrix is not unitary")
        eta = as_matrix(self.eta)
        if eta.shape != (self.dim_v1, self.dim_v1):
            raise MatrixShapeError("probe state must live on V1")
        if not is_hermitian(eta, tol):
            raise ValueError("probe state is not Hermitian")
        evals = np.linalg.eigvalsh(hermitian_part(eta))
        if evals[0] < -tol.psd_tol or abs(float(np.trace(eta).real) - 1.0) > 1e-8:
            raise ValueError("probe state is not a state")
        if self.pointer.dim != self.dim_v2:
            raise MatrixShapeError("pointer observable must live on V2")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "eta", hermitian_part(eta))

    def outcomes(self) -> tuple[str, ...]:
        return self.pointer.outcomes


def _coupled_state(m: MeasurementModel, rho: np.ndarray) -> np.ndarray:
    return m.u @ kron(rho, m.eta) @ m.u.conj().T


def _readout(m: MeasurementModel, w: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Tr_V2 of w (1 (x) f), for w on (output system) (x) V2."""
    w4 = w.reshape(m.dim_out, m.dim_v2, m.dim_out, m.dim_v2)
    return np.ascontiguousarray(np.einsum("mvnw,wv->mn", w4, f))


def model_probability(m: MeasurementModel, rho: np.ndarray, labels) -> float:
    """Probability of reading an outcome subset on the pointer."""
    rho = as_matrix(rho)
    if rho.shape != (m.dim_in, m.dim_in):
        raise MatrixShapeError("state must live on the model input space")
    f = m.pointer.effect_of(labels).matrix
    w = _coupled_state(m, rho)
    return float(np.einsum("mvmw,wv->", w.reshape(m.dim_out, m.dim_v2, m.dim_out, m.dim_v2), f).real)


def model_poststate(m: MeasurementModel, rho: np.ndarray, labels) -> np.ndarray:
    """Unnormalized conditional state after reading an outcome subset."""
    rho = as_matrix(rho)
    if rho.shape != (m.dim_in, m.dim_in):
        raise MatrixShapeError("state must live on the model input space")
    f = m.pointer.effect_of(labels).matrix
    return _readout(m, _coupled_state(m, rho), f)


def model_instrument(
    m: MeasurementModel,
    f: PointerMap | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> Instrument:
    """The instrument a model induces along a pointer relabeling.

    With no relabeling each pointer outcome becomes one branch.
    """
    if f is None:
        f = PointerMap({x: x for x in m.pointer.outcomes})
    f.check_total(m.pointer.outcomes)
    branches = {}
    for y in f.codomain:
        eff = m.pointer.effect_of(f.preimage(y)).matrix

        def action(rho, eff=eff):
            return _readout(m, _coupled_state(m, rho), eff)

        branches[y] = CPMap(m.dim_in, m.dim_out, choi_from_action(action, m.dim_in), tol=tol)
    return Instrument(f.codomain, branches, tol=tol)


def model_is_part_of(m: MeasurementModel, device, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether a device arises from the model, via its induced instrument."""
    return is_part_of(device, model_instrument(m, tol=tol), tol)


def model_channel(m: MeasurementModel, tol: Tolerances = DEFAULT_TOL) -> CPMap:
    """The channel a model induces; independent of the pointer observable."""

    def action(rho):
        return _readout(m, _coupled_state(m, rho), np.eye(m.dim_v2))

    return CPMap(m.dim_in, m.dim_out, choi_from_action(action, m.dim_in), kind="channel", tol=tol)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def _complete_unitary(prescribed: dict[int, np.ndarray], side: int) -> np.ndarray:
    """Fill the unprescribed columns by Gram-Schmidt over the canonical basis."""
    u = np.zeros((side, side), dtype=complex)
    have = []
    for idx, col in prescribed.items():
        u[:, idx] = col
        have.append(col)
    free = [i for i in range(side) if i not in prescribed]
    pool = []
    for k in range(side):
        v = np.zeros(side, dtype=complex)
        v[k] = 1.0
        for w in have + pool:
            v = v - w * np.vdot(w, v)
        norm = np.linalg.norm(v)
        if norm > 1e-7:
            pool.append(v / norm)
        if len(pool) == len(free):
            break
    if len(pool) != len(free):
        raise AssertionError("unitary completion failed")
    for idx, col in zip(free, pool):
        u[:, idx] = col
    return u


def _base_parts(dil, tol: Tolerances):
    """Probe dims, probe state, and coupling unitary from a dilation.

    The coupling sends (system (x) probe ground state) to (V psi) (x) e
    with the prescribed columns completed to a full unitary; everything
    else about the probe is irrelevant because the probe starts in a
    pure state.
    """
    dh, dk, da = dil.dim_in, dil.dim_out, dil.ancilla_dim
    dm = dh
    dv1 = dk * da
    dv2 = da * dm
    side = dh * dv1
    prescribed = {}
    for i in range(dh):
        psi = np.zeros(dh, dtype=complex)
        psi[i] = 1.0
        v_psi = dil.v @ psi  # lives on K (x) A, index m*da + a
        col = np.zeros(side, dtype=complex)
        for m in range(dk):
            for a_idx in range(da):
                out_index = m * dv2 + a_idx * dm + 0
                col[out_index] = v_psi[m * da + a_idx]
        prescribed[i * dv1 + 0] = col
    u = _complete_unitary(prescribed, side)
    eta = np.zeros((dv1, dv1), dtype=complex)
    eta[0, 0] = 1.0
    return dv1, dv2, eta, u


def _pointer_from_ancilla(obs: Observable, dm: int) -> Observable:
    effects = {
        x: Effect(kron(obs.effects[x].matrix, np.eye(dm)))
        for x in obs.outcomes
    }
    return Observable(obs.outcomes, effects)


def synthesize_model(ins: Instrument, tol: Tolerances = DEFAULT_TOL) -> MeasurementModel:
    """Build a measurement model realizing an instrument exactly.

    Probe sides are the smallest satisfying the unitary shape condition;
    the probe starts in the first basis state and the pointer observable
    carries the per-branch ancilla effects of the instrument's total
    channel. The result is verified branch by branch.
    """
    lam = total_channel(ins, tol)
    dil = minimal_stinespring(lam, tol)
    anc = rn_observable(dil, ins, tol)
    dv1, dv2, eta, u = _base_parts(dil, tol)
    pointer = _pointer_from_ancilla(anc, ins.dim_in)
    model = MeasurementModel(ins.dim_in, ins.dim_out, dv1, dv2, eta, u, pointer, tol=tol)
    induced = model_instrument(model, tol=tol)
    for x in ins.outcomes:
        if not close(induced.branches[x].choi, ins.branches[x].choi, tol):
            raise ModelSynthesisError(f"synthesized model misses branch {x!r}")
    return model


def shared_model_pair(
    i1: Instrument, i2: Instrument, tol: Tolerances = DEFAULT_TOL
) -> tuple[MeasurementModel, MeasurementModel]:
    """Two models identical except for pointers, realizing two instruments.

    Requires the instruments to share their total channel; the common
    probe state and coupling are then built once from that channel's
    dilation, so the returned models agree bytewise outside the pointer.
    """
    lam1 = total_channel(i1, tol)
    lam2 = total_channel(i2, tol)
    if not close(lam1.choi, lam2.choi, tol):
        raise TotalMismatchError("instruments do not share their total channel")
    dil = minimal_stinespring(lam1, tol)
    anc1 = rn_observable(dil, i1, tol)
    anc2 = rn_observable(dil, i2, tol)
    dv1, dv2, eta, u = _base_parts(dil, tol)
    m1 = MeasurementModel(
        i1.dim_in, i1.dim_out, dv1, dv2, eta, u,
        _pointer_from_ancilla(anc1, i1.dim_in), tol=tol,
    )
    m2 = MeasurementModel(
        i2.dim_in, i2.dim_out, dv1, dv2, eta, u,
        _pointer_from_ancilla(anc2, i2.dim_in), tol=tol,
    )
    for m, ins in ((m1, i1), (m2, i2)):
        induced = model_instrument(m, tol=tol)
        for x in ins.outcomes:
            if not close(induced.branches[x].choi, ins.branches[x].choi, tol):
                raise ModelSynthesisError("shared model misses a branch")
    return m1, m2


def swap_model(eta: np.ndarray, pointer: Observable, tol: Tolerances = DEFAULT_TOL) -> MeasurementModel:
    """Model whose coupling exchanges system and probe.

    All four spaces share one dimension; the induced observable equals
    the pointer observable and the induced channel is the contraction to
    the probe state.
    """
    eta = as_matrix(eta)
    d = eta.shape[0]
    if pointer.dim != d:
        raise MatrixShapeError("pointer dimension must match the probe")
    u = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            u[j * d + i, i * d + j] = 1.0
    return MeasurementModel(d, d, d, d, eta, u, pointer, tol=tol)
