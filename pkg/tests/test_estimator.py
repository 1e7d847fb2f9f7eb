import numpy as np
import pytest
from conftest import small_delay_system
from hypothesis import given, settings
from hypothesis import strategies as st

from morgreed.errors import FrozenEstimator
from morgreed.estimator import (
    ResidualEstimator,
    delta_diagnostic,
    estimate,
    residual,
    residual_of_residual,
    update_vr,
)
from morgreed.linalg import empty_basis, gram_residual, orth_extend
from morgreed.rom import output_error, project
from morgreed.system import FrequencyPoint, SolveCounter, solve_fom

FREQS = [FrequencyPoint(f) for f in np.linspace(1.3e8, 9.7e9, 7)]


def _setup(seed=0, order=60, inputs=3, snapshots=(2e9,)):
    sys = small_delay_system(order=order, seed=seed, num_inputs=inputs, num_outputs=inputs)
    V = empty_basis(order)
    for f in snapshots:
        V = orth_extend(V, solve_fom(sys, FrequencyPoint(f)))
    return sys, V, project(sys, V)


def test_residual_full_basis_is_zero(delay_system):
    rom = project(delay_system, np.eye(delay_system.order))
    for j in range(delay_system.num_inputs):
        assert np.linalg.norm(residual(delay_system, rom, FREQS[2], j)) <= 1e-8


def test_residual_matches_dense_recomputation():
    sys, V, rom = _setup()
    p = FREQS[3]
    K = sys.assemble(p.s)
    z = np.linalg.solve(V.T @ K @ V, V.T @ sys.B)
    ref = sys.B - K @ (V @ z)
    for j in range(sys.num_inputs):
        np.testing.assert_allclose(residual(sys, rom, p, j), ref[:, j], atol=1e-10)
    with pytest.raises(IndexError):
        residual(sys, rom, p, sys.num_inputs)


def test_vr_equal_v_gives_zero():
    sys, V, rom = _setup(snapshots=(2e9, 7e9))
    est = ResidualEstimator(sys, V)
    scale = np.abs(sys.C @ sys.B).max()
    for p in FREQS:
        assert estimate(est, sys, rom, p) <= 1e-9 * scale


def test_full_vr_is_exact():
    sys, V, rom = _setup()
    est = ResidualEstimator(sys, np.eye(sys.order))
    for p in FREQS:
        err = output_error(sys, rom, p)
        assert abs(estimate(est, sys, rom, p) - err) <= 1e-8 * max(1.0, err)
        assert residual_of_residual(est, sys, rom, p) <= 1e-8
        assert delta_diagnostic(est, sys, rom, p) <= 1e-8


def test_residual_of_residual_with_orthogonal_vr():
    sys, V, rom = _setup(inputs=1)
    p = FREQS[4]
    r = residual(sys, rom, p, 0)
    # V_r orthogonal to both parts of r forces z_r = 0
    q, _ = np.linalg.qr(np.column_stack([r.real, r.imag]), mode="complete")
    est = ResidualEstimator(sys, q[:, 2:8])
    bound = est.bind(rom)
    vals = bound.evaluate(p)
    assert np.abs(vals.z_r).max() <= 1e-12 * np.linalg.norm(r)
    assert residual_of_residual(est, sys, rom, p) == pytest.approx(np.linalg.norm(r), rel=1e-10)


def test_update_vr_counts_and_deflates():
    sys, V, rom = _setup()
    c = SolveCounter()
    est = update_vr(ResidualEstimator.empty(sys), sys, V, FREQS[1], counter=c)
    assert c.count == 1
    np.testing.assert_array_equal(est.basis[:, : V.shape[1]], V)
    assert est.order > V.shape[1]
    assert gram_residual(est.basis) <= 1e-10
    again = update_vr(est, sys, V, FREQS[1], counter=c)
    assert again.order == est.order
    assert c.count == 2


def test_update_vr_exact_at_residual_sample():
    sys, V, rom = _setup()
    p = FREQS[5]
    before = ResidualEstimator(sys, orth_extend(V, solve_fom(sys, FREQS[0])))
    after = update_vr(before, sys, V, p)
    err = output_error(sys, rom, p)
    gap_before = abs(estimate(before, sys, rom, p) - err)
    gap_after = abs(estimate(after, sys, rom, p) - err)
    assert gap_after <= gap_before + 1e-12
    assert gap_after <= 1e-8 * max(1.0, err)


def test_frozen_estimator_refuses_update():
    sys, V, rom = _setup()
    est = update_vr(ResidualEstimator.empty(sys), sys, V, FREQS[1]).freeze()
    assert est.frozen
    with pytest.raises(FrozenEstimator):
        update_vr(est, sys, V, FREQS[2])


def test_empty_vr_estimates_zero():
    sys, V, rom = _setup()
    assert estimate(ResidualEstimator.empty(sys), sys, rom, FREQS[0]) == 0.0


def test_delta_counts_one_solve():
    sys, V, rom = _setup()
    est = update_vr(ResidualEstimator.empty(sys), sys, V, FREQS[1])
    c = SolveCounter()
    d = est.bind(rom).delta(FREQS[3], counter=c)
    assert d >= 0 and c.count == 1


def test_estimates_are_deterministic():
    sys, V, rom = _setup()
    est = update_vr(ResidualEstimator.empty(sys), sys, V, FREQS[1]).freeze()
    a = [estimate(est, sys, rom, p) for p in FREQS]
    b = [estimate(est, sys, rom, p) for p in FREQS]
    assert a == b


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 10_000), f_star=st.floats(1e8, 1e10), f_r=st.floats(1e8, 1e10))
def test_estimator_sandwich(seed, f_star, f_r):
    sys, V, rom = _setup(seed=seed, order=40, snapshots=(f_star,))
    est = update_vr(ResidualEstimator.empty(sys), sys, V, FrequencyPoint(f_r))
    bound = est.bind(rom)
    for p in FREQS:
        vals = bound.evaluate(p)
        d = bound.delta(p, values=vals)
        err = output_error(sys, rom, p)
        slack = 1e-9 * max(1.0, err)
        assert d >= 0
        assert vals.delta_tilde - d <= err + slack
        assert err <= vals.delta_tilde + d + slack
