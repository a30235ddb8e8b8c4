import math

import numpy as np
import pytest

from swapchar import circuits, protocol, qcore, tomography
from swapchar.circuits import Variant
from swapchar.errors import InvalidArgument
from swapchar.qcore import CountsRecord, DensityMatrix, basis_state
from swapchar.tomography import (
    ANCILLA_ZERO,
    UNCONDITIONAL,
    post_st_states,
    qst_exact,
    qst_from_counts,
    sampled_qst,
)


def rec(n0, n1):
    return CountsRecord({"0": n0, "1": n1}, "q0-left", ("test",))


# -- exact reconstruction --------------------------------------------------


def test_qst_exact_examples():
    zero = basis_state("0").to_dm()
    assert np.allclose(qst_exact(zero).elements, zero.elements, atol=1e-12)
    mixed = DensityMatrix.maximally_mixed(1)
    assert np.allclose(qst_exact(mixed).elements, np.eye(2) / 2, atol=1e-12)


def test_qst_exact_round_trip_random():
    gen = np.random.default_rng(11)
    for _ in range(100):
        rho = qcore.random_density_matrix(gen, 1)
        assert np.max(np.abs(qst_exact(rho).elements - rho.elements)) < 1e-10


def test_qst_exact_rejects_two_qubits():
    with pytest.raises(InvalidArgument):
        qst_exact(DensityMatrix.maximally_mixed(2))


# -- counts-based reconstruction -------------------------------------------


def test_qst_from_counts_z_eigenstate():
    res = qst_from_counts(rec(500, 500), rec(500, 500), rec(1000, 0))
    assert np.allclose(res.dm.elements, np.diag([1, 0]), atol=1e-12)
    assert not res.projected


def test_qst_from_counts_projects_unphysical_vector():
    # equal expectations whose Bloch norm is 1.2
    ex = ey = ez = 1.2 / math.sqrt(3)
    n = 10**6
    res = qst_from_counts(*(rec(round(n * (1 + e) / 2), n - round(n * (1 + e) / 2)) for e in (ex, ey, ez)))
    assert abs(res.expectations.norm() - 1.2) < 1e-5
    assert res.projected
    assert abs(qcore.bloch_norm(res.dm) - 1) < 1e-12


def test_qst_from_counts_zero_shots():
    with pytest.raises(InvalidArgument):
        qst_from_counts(rec(0, 0), rec(1, 1), rec(1, 1))


def test_qst_from_counts_rejects_wide_outcomes():
    wide = CountsRecord({"00": 3}, "q0-left", ("a", "b"))
    with pytest.raises(InvalidArgument):
        qst_from_counts(wide, rec(1, 1), rec(1, 1))


def test_sampled_plus_state_fidelity():
    plus = basis_state("+").to_dm()
    res = sampled_qst(plus, 10**5, 42)
    assert qcore.state_fidelity(res.dm, plus) > 0.995


def test_sampled_expectations_are_unbiased():
    rho = qcore.random_density_matrix(np.random.default_rng(5), 1)
    b = qcore.bloch_from_dm(rho)
    est = np.mean([[r.expectations.ex, r.expectations.ey, r.expectations.ez]
                   for r in (sampled_qst(rho, 2000, 100 * s) for s in range(200))], axis=0)
    assert np.max(np.abs(est - [b.x, b.y, b.z])) < 4 / math.sqrt(2000 * 200)


def test_infidelity_shrinks_with_shots():
    gen = np.random.default_rng(8)
    better = 0
    trials = 40
    for t in range(trials):
        rho = qcore.random_density_matrix(gen, 1)
        lo = 1 - qcore.state_fidelity(sampled_qst(rho, 10**3, 7 * t).dm, rho)
        hi = 1 - qcore.state_fidelity(sampled_qst(rho, 10**6, 7 * t).dm, rho)
        better += hi < lo
    assert better >= 0.95 * trials


@pytest.mark.parametrize("basis", ["X", "Y", "Z"])
@pytest.mark.parametrize("label", ["0", "1", "+", "-", "+i", "-i"])
def test_basis_change_circuits_measure_the_right_eigenvalue(basis, label):
    prep = protocol.PREP_ROTATIONS[label]
    c = tomography.measurement_circuit([qcore.make_rotation(*prep)], basis)
    p0 = qcore.measure_probs(circuits.simulate(c), [0])["0"]
    b = qcore.bloch_from_dm(basis_state(label).to_dm())
    expected = (1 + {"X": b.x, "Y": b.y, "Z": b.z}[basis]) / 2
    assert abs(p0 - expected) < 1e-12


# -- post-test states ------------------------------------------------------


def cswap_config(prep, u_ctrl, eps=0.0):
    return protocol.prep_config(prep, u_ctrl=u_ctrl, epsilon=eps, variant=Variant.CSWAP)


@pytest.mark.parametrize("conditioning", [ANCILLA_ZERO, UNCONDITIONAL])
@pytest.mark.parametrize("label", ["0", "+", "-i"])
def test_identical_inputs_are_conserved(conditioning, label):
    out = post_st_states(cswap_config(label, label), conditioning)
    assert abs(out.fidelity_ctrl - 1) < 1e-9 and abs(out.fidelity_test - 1) < 1e-9
    assert abs(out.purity_ctrl - 1) < 1e-9 and abs(out.purity_test - 1) < 1e-9


@pytest.mark.parametrize("conditioning", [ANCILLA_ZERO, UNCONDITIONAL])
def test_orthogonal_inputs_lose_fidelity(conditioning):
    out = post_st_states(cswap_config("0", "1"), conditioning)
    assert out.fidelity_ctrl < 1 - 1e-3 and out.fidelity_test < 1 - 1e-3


@pytest.mark.parametrize("conditioning", [ANCILLA_ZERO, UNCONDITIONAL])
def test_fidelity_falls_as_control_rotates_away(conditioning):
    thetas = np.linspace(math.pi / 2, 3 * math.pi / 2, 11)
    fc, ft = [], []
    for th in thetas:
        out = post_st_states(cswap_config("+", qcore.make_rotation("Y", th).matrix), conditioning)
        fc.append(out.fidelity_ctrl)
        ft.append(out.fidelity_test)
    assert np.all(np.diff(fc) < 1e-12) and np.all(np.diff(ft) < 1e-12)
    assert fc[-1] < fc[0] - 0.1


def test_ancilla_zero_branch_probability():
    out = post_st_states(cswap_config("0", "+"), ANCILLA_ZERO)
    assert abs(out.branch_probability - 0.75) < 1e-12


def test_post_st_rejects_other_variants():
    for v in (Variant.BSM, Variant.TOFFOLI):
        with pytest.raises(InvalidArgument):
            post_st_states(protocol.prep_config("0", u_ctrl="0", variant=v))
    with pytest.raises(InvalidArgument):
        post_st_states(cswap_config("0", "0"), "sometimes")
