import numpy as np
import pytest

from qcompat import feasibility as fs
from qcompat.fixtures import I2, SX, SZ
from qcompat.matkit import herm_coords, hermitian_basis, is_psd

from conftest import rand_herm


def one_block_trace_problem(value, side=2):
    # the trace functional in coordinates: sum of the diagonal entries
    row = np.zeros((1, side * side))
    row[0, :side] = 1.0
    c = fs.AffineConstraint((("x", row),), np.array([float(value)]))
    return fs.FeasibilityProblem((("x", side),), (c,))


def test_unit_trace_feasible():
    out = fs.solve(one_block_trace_problem(1.0))
    assert out.verdict == "feasible"
    w = out.witness["x"]
    assert is_psd(w)
    assert np.trace(w).real == pytest.approx(1.0, abs=1e-7)
    assert out.margin is None


def test_negative_trace_infeasible():
    out = fs.solve(one_block_trace_problem(-1.0), margin_resolution=1e-5)
    assert out.verdict == "infeasible"
    assert out.witness is None
    # best achievable minimum eigenvalue is -1/2 (X = -I/2)
    assert out.margin == pytest.approx(-0.5, abs=5e-3)
    assert out.margin < -1e-7


def test_affine_inconsistency_reported_distinctly():
    row = np.zeros((1, 4))
    row[0, :2] = 1.0
    c1 = fs.AffineConstraint((("x", row),), np.array([1.0]))
    c2 = fs.AffineConstraint((("x", row),), np.array([2.0]))
    out = fs.solve(fs.FeasibilityProblem((("x", 2),), (c1, c2)))
    assert out.verdict == "infeasible"
    assert out.affine_inconsistent
    assert out.margin == float("-inf")


def noisy_pair(t):
    e1 = (I2 + t * SX) / 2
    e2 = (I2 + t * SZ) / 2
    return e1, e2


def coexistence_problem(e1, e2):
    d = e1.shape[0]
    blocks = tuple((name, d) for name in ("g11", "g10", "g01", "g00"))
    cons = (
        fs.encode_sum_constraint(("g11", "g10"), e1, label="margin-1"),
        fs.encode_sum_constraint(("g11", "g01"), e2, label="margin-2"),
        fs.encode_sum_constraint(("g11", "g10", "g01", "g00"), np.eye(d), label="total"),
    )
    return fs.FeasibilityProblem(blocks, cons)


def grid_best_violation(t, step=0.02):
    """Independent oracle: scan G = (g0 I + gx sx + gz sz)/2 on a fine grid.

    Returns the smallest over the grid of the worst operator-inequality
    violation for the four coexistence constraints; <= 0 means a valid
    joint effect exists on the grid.
    """
    g0 = np.arange(0.0, 1.0 + step, step)[:, None, None]
    gx = np.arange(-1.0, 1.0 + step, step)[None, :, None]
    gz = np.arange(-1.0, 1.0 + step, step)[None, None, :]
    v1 = np.sqrt(gx**2 + gz**2) - g0
    v2 = np.sqrt((t - gx) ** 2 + gz**2) - (1.0 - g0)
    v3 = np.sqrt(gx**2 + (t - gz) ** 2) - (1.0 - g0)
    v4 = np.sqrt((gx - t) ** 2 + (gz - t) ** 2) - g0
    worst = np.maximum(np.maximum(v1, v2), np.maximum(v3, v4))
    return float(worst.min())


def test_coexistence_noisy_pair_against_grid_oracle():
    # oracle: t = 0.5 has a grid point with real slack; t = 0.9 violates
    # every grid point by a margin far above the grid resolution
    assert grid_best_violation(0.5) < -0.05
    assert grid_best_violation(0.9) > 0.02

    e1, e2 = noisy_pair(0.5)
    out = fs.solve(coexistence_problem(e1, e2))
    assert out.verdict == "feasible"
    g11 = out.witness["g11"]
    assert is_psd(g11)
    for gap in (e1 - g11, e2 - g11, g11 - (e1 + e2 - I2)):
        assert np.linalg.eigvalsh((gap + gap.conj().T) / 2)[0] >= -1e-6

    e1, e2 = noisy_pair(0.9)
    out = fs.solve(coexistence_problem(e1, e2))
    assert out.verdict == "infeasible"
    assert out.margin < -1e-7


def test_sum_constraint_witness_resums():
    rng = np.random.default_rng(45)
    from qcompat.devices import choi_from_kraus
    from conftest import rand_kraus

    lam = choi_from_kraus(rand_kraus(rng, 2, 2, 2, scale=1.0))
    cons = (fs.encode_sum_constraint(("a", "b"), lam.choi),)
    out = fs.solve(fs.FeasibilityProblem((("a", 4), ("b", 4)), cons))
    assert out.verdict == "feasible"
    total = out.witness["a"] + out.witness["b"]
    assert np.linalg.norm(total - lam.choi) <= 1e-6


def test_partial_trace_constraint_encodes_trace_preservation():
    cons = (
        fs.encode_partial_trace_constraint("j", (2, 2), keep=0, target=np.eye(2)),
    )
    out = fs.solve(fs.FeasibilityProblem((("j", 4),), cons))
    assert out.verdict == "feasible"
    from qcompat.devices import CPMap

    # the witness is a valid channel Choi matrix
    CPMap(2, 2, out.witness["j"], kind="channel")


def test_heisenberg_unit_constraint():
    from qcompat.devices import CPMap, apply_h

    px = (I2 + SX) / 2
    cons = (fs.encode_heisenberg_unit_constraint("j", (2, 2), px),)
    out = fs.solve(fs.FeasibilityProblem((("j", 4),), cons))
    assert out.verdict == "feasible"
    m = CPMap(2, 2, out.witness["j"])
    assert np.linalg.norm(apply_h(m, I2) - px) <= 1e-6


def test_interior_point_found_within_budget():
    # feasible problem with a strictly interior witness on a 16x16 block
    rng = np.random.default_rng(47)
    side = 16
    x_star = np.eye(side) * 0.5
    rows, rhs = [], []
    row = np.zeros(side * side)
    row[:side] = 1.0
    rows.append(row)
    rhs.append(0.5 * side)
    for _ in range(6):
        r = rand_herm(rng, side)
        rows.append(herm_coords(r))
        rhs.append(float(np.vdot(herm_coords(r), herm_coords(x_star))))
    cons = tuple(
        fs.AffineConstraint((("x", row[None, :]),), np.array([v]))
        for row, v in zip(rows, rhs)
    )
    out = fs.solve(fs.FeasibilityProblem((("x", side),), cons), max_iter=50_000)
    assert out.verdict == "feasible"
    assert is_psd(out.witness["x"])


def test_margin_monotone_under_constraint_addition():
    rng = np.random.default_rng(49)
    for _ in range(5):
        side = 3
        row = np.zeros(side * side)
        row[:side] = 1.0
        base = fs.AffineConstraint((("x", row[None, :]),), np.array([-0.4]))
        extra_vec = herm_coords(rand_herm(rng, side))
        extra = fs.AffineConstraint(
            (("x", extra_vec[None, :]),), np.array([float(rng.normal())])
        )
        p1 = fs.FeasibilityProblem((("x", side),), (base,))
        p2 = fs.FeasibilityProblem((("x", side),), (base, extra))
        m1 = fs.solve(p1, margin_resolution=1e-5).margin
        m2 = fs.solve(p2, margin_resolution=1e-5).margin
        assert m1 is not None and m2 is not None
        assert m2 <= m1 + 5e-3


def test_determinism_bit_identical():
    e1, e2 = noisy_pair(0.7)
    p = coexistence_problem(e1, e2)
    out1 = fs.solve(p)
    out2 = fs.solve(p)
    assert out1.verdict == out2.verdict
    assert out1.iterations == out2.iterations
    assert out1.residual == out2.residual
    if out1.witness is not None:
        for k in out1.witness:
            assert np.array_equal(out1.witness[k], out2.witness[k])
    if out1.margin is not None:
        assert out1.margin == out2.margin


def test_constraint_validation():
    bad = fs.AffineConstraint((("y", np.eye(4)),), np.zeros(4))
    with pytest.raises(ValueError):
        fs.FeasibilityProblem((("x", 2),), (bad,))


def test_trace_log_lines():
    lines = []
    fs.solve(one_block_trace_problem(1.0), trace=lines.append)
    assert lines
    assert all("residual=" in ln or "bisect" in ln or "affine" in ln for ln in lines)


def test_hermitian_basis_coherence():
    # coordinate conventions agree between encoder and matkit basis
    basis = hermitian_basis(2)
    for b in basis:
        x = herm_coords(b)
        assert x.shape == (4,)
