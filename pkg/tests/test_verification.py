import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dunkl_tl.config import RunConfig
from dunkl_tl.dunkl_operator import weighted_operator_norm
from dunkl_tl.littlewood_paley import TLParams
from dunkl_tl.pipeline import Setting
from dunkl_tl.verification import (
    DUALITY_CASES,
    DualityCase,
    almost_orthogonality_decay,
    default_sample_points,
    duality_battery,
    duality_ratio,
    gap_norms,
    identity_split_check,
    inject_fault,
    lemma51_battery,
    maximal_battery,
    operator_decay,
    maximal_function,
    norm_equivalence_battery,
    radius_menu,
    split_self_test,
    trial_seeds,
)


def test_trial_seeds_deterministic():
    assert trial_seeds(3, 5) == trial_seeds(3, 5)
    assert trial_seeds(3, 5) != trial_seeds(4, 5)
    assert len(set(trial_seeds(0, 100))) == 100


@pytest.mark.parametrize("tag", "ABCD")
def test_duality_ratio_scale_invariant(small, tag):
    case = DUALITY_CASES[tag].with_dimension(small.N)
    f, g = small.bandlimited(1), small.bandlimited(2)
    r = duality_ratio(f, g, small.lp, case)
    assert duality_ratio(3.5 * f, -0.25 * g, small.lp, case) == pytest.approx(r, rel=1e-12)


def test_orthogonal_pair_has_zero_ratio(small):
    grid = small.grid
    f, g = small.bandlimited(1), small.bandlimited(2)
    g = g - grid.inner(f, g) / grid.inner(f, f) * f
    case = DUALITY_CASES["A"].with_dimension(small.N)
    assert duality_ratio(f, g, small.lp, case) <= 1e-12


def test_zero_pair_is_skipped(small):
    case = DUALITY_CASES["A"]
    assert duality_ratio(np.zeros(small.grid.size), small.bandlimited(1), small.lp, case) is None


@pytest.mark.parametrize(
    "case",
    [DualityCase("A", 0.0, 0.9, 2.0), DualityCase("B", 0.0, 2.0, 2.0),
     DualityCase("C", 0.0, 2.0, 2.0), DualityCase("D", 0.0, 2.0, 0.9)],
)
def test_side_conditions(small, case):
    with pytest.raises(ValueError, match="do not fit"):
        case.check(small.N)


def test_duality_index_bound_rejected(small):
    # p below N/(N+1) is outside the admissible range
    with pytest.raises(ValueError):
        DualityCase("D", 0.0, 0.5, 0.9).check(small.N)


def test_dual_indices():
    d = DUALITY_CASES["A"].dual
    assert d["p"] == pytest.approx(2.0) and d["q"] == pytest.approx(2.0)
    assert DUALITY_CASES["C"].dual["q"] == np.inf
    shifted = DUALITY_CASES["D"].with_dimension(2.0)
    assert shifted.dual["alpha"] == pytest.approx(2.0 * (1 / 0.9 - 1))


def test_duality_battery_deterministic(small):
    a = duality_battery(small, "A", trials=4)
    b = duality_battery(small, "A", trials=4)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert a.passed and len(a.ratios) == 4 and np.isfinite(a.c_hat)


def test_duality_battery_resolution_factor(small):
    ref = Setting(RunConfig(m=64))
    rep = duality_battery(small, "C", trials=3, reference=ref)
    assert rep.resolution_factor >= 1.0
    assert rep.extra["reference_points"] == 64


def test_gap_norms_decrease(setting):
    norms = gap_norms(setting.lp)
    vals = list(norms.values())
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_orthogonality_refuses_short_window():
    st_ = Setting(RunConfig(m=128, k_min=0, k_max=3, M=1))
    params = almost_orthogonality_decay(st_.lp)
    assert params.status == "insufficient-data"
    assert params.epsilon_prime is None and not params.passed


def test_default_sample_points(setting):
    idx = default_sample_points(setting.lp)
    x = setting.grid.points[idx, 0]
    assert len(idx) == 10 and np.all(x > 0) and np.all(np.diff(x) > 0)
    assert x[-1] == pytest.approx(setting.cfg.L / 2, abs=setting.grid.delta)


def test_lemma51_battery_shape(small):
    rep = lemma51_battery(small.lp, 0, "A", N=small.N)
    assert len(rep.ratios) == 10 and rep.extra["sup"] == max(rep.ratios)
    assert rep.extra["spread"] >= 1.0
    with pytest.raises(ValueError, match="outside"):
        lemma51_battery(small.lp, 40, "A")


def test_maximal_of_constant(small):
    one = np.ones(small.grid.size)
    assert np.allclose(maximal_function(one, small.grid), 1.0, rtol=1e-12)


@given(seed=st.integers(0, 2**16))
def test_maximal_dominates(small, seed):
    f = small.bandlimited(seed)
    assert np.all(maximal_function(f, small.grid) >= np.abs(f) * (1 - 1e-12))


def test_radius_menu(small):
    r = radius_menu(small.grid)
    assert r[0] == pytest.approx(small.grid.delta / 2) and np.allclose(r[1:] / r[:-1], 2)


def test_split_checker_catches_injected_fault(setting):
    out = split_self_test(setting.operators)
    assert out["checker_ok"]
    assert out["clean"]["residual"] <= 1e-10 and out["injected"]["residual"] > 1e-10


def test_split_check_one_point_cubes(setting):
    check = identity_split_check(setting.with_M(9).operators)
    assert check.passed and check.r1_norm == 0.0


def test_inject_fault_leaves_original(setting):
    ops = setting.operators
    before = ops.T_M.copy()
    inject_fault(ops)
    assert np.array_equal(ops.T_M, before)


def test_norm_equivalence_small(setting):
    rep = norm_equivalence_battery(setting, [TLParams(0, 2, 2)], trials=3)
    assert rep.passed and not rep.extra["codec_failures"]
    assert all(1 / 4 <= r <= 4 for r in rep.ratios)


def test_diagonal_pair_submultiplicative(setting):
    lp = setting.lp
    for k in (-2, 0, 3):
        D = lp.dk(k).matrix
        assert weighted_operator_norm(D @ D, lp.masses) <= weighted_operator_norm(D, lp.masses) ** 2 * (1 + 1e-12)


def test_classical_gap_three_decay(setting_k0):
    norms = gap_norms(setting_k0.lp)
    assert norms[3] / norms[0] <= 2.0 ** (-3 * 0.3)


def test_orthogonality_through_R1(setting):
    norms, fit = operator_decay(setting.lp, setting.operators.R_1)
    assert fit is not None and fit.value >= 0.3 and fit.r2 >= 0.9
    assert list(norms) == list(range(6))


def test_lemma51_classical_case_A(setting_k0):
    rep = lemma51_battery(setting_k0.lp, 0, "A", N=setting_k0.N)
    assert rep.passed and np.all(np.isfinite(rep.ratios)) and min(rep.ratios) > 0


def test_maximal_battery(small):
    rep = maximal_battery(small, trials=5)
    assert rep.passed and len(rep.ratios) == 5 and np.isfinite(rep.c_hat) and rep.c_hat >= 1.0
