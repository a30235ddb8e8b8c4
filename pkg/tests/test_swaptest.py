import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapchar import protocol, qcore
from swapchar.errors import InvalidArgument
from swapchar.qcore import DensityMatrix, basis_state
from swapchar.swaptest import (
    Shots,
    combine_measurements,
    oracle_p1_mixed,
    oracle_p1_pure,
    overlap_sq,
    run_st,
    singlet_projection_prob,
)

VARIANTS = ["cswap", "bsm", "toffoli"]


@pytest.mark.parametrize("variant", VARIANTS)
def test_run_st_examples(variant):
    assert run_st(variant, basis_state("+"), basis_state("+")).p_one < 1e-12
    assert abs(run_st(variant, basis_state("0"), basis_state("1")).p_one - 0.5) < 1e-12
    mixed = DensityMatrix.maximally_mixed(1)
    assert abs(run_st(variant, mixed, basis_state("+")).p_one - 0.25) < 1e-12


@pytest.mark.parametrize("variant", VARIANTS)
def test_run_st_pure_law(variant, pure_pairs):
    for a, b in pure_pairs:
        assert abs(run_st(variant, a, b).p_one - (1 - overlap_sq(a, b)) / 2) < 1e-9


def test_run_st_rejects_multi_qubit_inputs():
    with pytest.raises(InvalidArgument):
        run_st("cswap", qcore.StateVector.zero(2), basis_state("0"))


def test_run_st_shots_mode_returns_counts():
    res = run_st("cswap", basis_state("0"), basis_state("+"), Shots(4000, 3))
    assert res.counts.shots == 4000
    assert res.counts == run_st("cswap", basis_state("0"), basis_state("+"), Shots(4000, 3)).counts
    assert abs(res.p_sampled - 0.25) < 4 * math.sqrt(0.25 * 0.75 / 4000)


def test_cswap_control_measurement_on_identical_inputs(pure_pairs):
    # the ancilla-0 branch leaves the control untouched, so undoing U_ctrl returns |0>
    for a, _ in pure_pairs[:20]:
        res = run_st("cswap", a, a, with_control_measurement=True)
        assert res.p_one < 1e-9
        assert abs(res.p_joint_00 - 1) < 1e-9


def test_combine_measurements_truth_table():
    table = {(0, 0): 0, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    for (anc, ctrl), out in table.items():
        assert combine_measurements(anc, ctrl) == out
    with pytest.raises(InvalidArgument):
        combine_measurements(2, 0)


def test_oracle_p1_pure():
    assert oracle_p1_pure(1) == 0
    assert oracle_p1_pure(0) == 0.5
    assert oracle_p1_pure(0.5) == 0.25
    with pytest.raises(InvalidArgument):
        oracle_p1_pure(1.5)


def test_singlet_projection_examples():
    s = basis_state("-i")
    assert singlet_projection_prob(s, s) < 1e-12
    assert abs(singlet_projection_prob(basis_state("0"), basis_state("1")) - 0.5) < 1e-12
    phased = qcore.StateVector(np.exp(0.7j) * s.amplitudes)
    assert singlet_projection_prob(s, phased) < 1e-12


def test_singlet_projection_equals_swap_test_law(pure_pairs):
    for a, b in pure_pairs:
        assert abs(singlet_projection_prob(a, b) - oracle_p1_pure(overlap_sq(a, b))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(VARIANTS))
def test_mixed_input_law(seed, variant):
    gen = np.random.default_rng(seed)
    rho, sigma = qcore.random_density_matrix(gen, 1), qcore.random_pure_state(gen)
    assert abs(run_st(variant, rho, sigma).p_one - oracle_p1_mixed(rho, sigma)) < 1e-9


@pytest.mark.parametrize("prep", protocol.PAULI_LABELS)
@pytest.mark.parametrize("variant", ["cswap", "toffoli"])
def test_mixed_dm_path_agrees_with_environment_purification(prep, variant):
    for eps, alpha in [(0.3, 0.2), (1.1, 2.5), (math.pi / 2, 1.0)]:
        cfg = protocol.prep_config(prep, epsilon=eps, r_prot=("X", alpha), u_ctrl="+",
                                   variant=variant, control_measurement=True)
        direct = run_st(variant, protocol.equivalent_test_dm(cfg), cfg.ctrl_state(),
                        with_control_measurement=True)
        full = protocol.run_point(cfg)
        assert abs(direct.p_one - full.p_one_exact) < 1e-9
        assert abs(direct.p_joint_00 - full.p_joint_00_exact) < 1e-9


def test_shot_estimate_concentration():
    p = run_st("cswap", basis_state("0"), basis_state("+")).p_one
    bound = 4 * math.sqrt(p * (1 - p) / 8192)
    misses = sum(
        abs(run_st("cswap", basis_state("0"), basis_state("+"), Shots(8192, s)).p_sampled - p) > bound
        for s in range(300)
    )
    assert misses == 0
