import math

import numpy as np
import pytest

from swapchar import protocol, qcore
from swapchar.circuits import Variant
from swapchar.errors import InvalidArgument
from swapchar.protocol import (
    ExperimentConfig,
    derivation_config,
    oracle_prob00,
    oracle_prob00_xaxis,
    prep_config,
    run_point,
    run_sweep,
    verify_derivation,
)

EPS = protocol.default_eps_grid()
ALPHA = protocol.default_alpha_grid()


def flat_y_config(**kw):
    return prep_config("+i", u_ctrl="+", r_prot=("Y", 0.0), variant=Variant.CSWAP,
                       control_measurement=False, **kw)


def follow_ctrl_config(prep, variant=Variant.BSM):
    return prep_config(prep, u_ctrl="follow", r_prot=("X", 0.0), variant=variant,
                       control_measurement=False)


# -- config ----------------------------------------------------------------


def test_config_validation():
    with pytest.raises(InvalidArgument):
        ExperimentConfig(epsilon=2.0)
    with pytest.raises(InvalidArgument):
        ExperimentConfig(r_prot=("X", 4.0))
    with pytest.raises(InvalidArgument):
        ExperimentConfig(shots=0)
    with pytest.raises(InvalidArgument):
        ExperimentConfig(u_ctrl="?")
    with pytest.raises(InvalidArgument):
        ExperimentConfig(variant="bsm", control_measurement=True)
    with pytest.raises(InvalidArgument):
        ExperimentConfig(u_ctrl=[[1, 1], [0, 1]])


@pytest.mark.parametrize("label", protocol.PAULI_LABELS)
def test_named_preparations(label):
    cfg = prep_config(label, u_ctrl=label)
    prepared = qcore.apply_gate(qcore.StateVector.zero(1), cfg.prep_gates()[0], [0])
    target = qcore.basis_state(label)
    assert abs(abs(prepared.overlap(target)) - 1) < 1e-12
    assert abs(abs(cfg.ctrl_state().overlap(target)) - 1) < 1e-12
    assert protocol.pauli_label(cfg) == label


def test_follow_uses_test_preparation():
    cfg = prep_config("-i", u_ctrl="follow")
    assert abs(abs(cfg.ctrl_state().overlap(qcore.basis_state("-i"))) - 1) < 1e-12


# -- run_point -------------------------------------------------------------


@pytest.mark.parametrize("prep", protocol.PAULI_LABELS)
def test_purity_is_one_without_coupling(prep):
    assert abs(run_point(prep_config(prep, r_prot=("X", 0.8))).test_purity - 1) < 1e-9


def test_purity_is_zero_at_full_coupling():
    assert run_point(prep_config("0", epsilon=math.pi / 2)).test_purity < 1e-9


def test_run_point_matches_closed_form_at_interior_point():
    r = run_point(derivation_config(0.7, 0.9))
    expected = 3 / 8 + 0.25 * math.cos(0.7) * math.cos(0.9)
    assert abs(r.p_joint_00_exact - expected) < 1e-12
    assert abs(r.p_one_exact - (1 - expected)) < 1e-12
    assert r.oracle_target == "p_joint_00" and r.abs_err < 1e-12


def test_run_point_rejects_non_config():
    with pytest.raises(InvalidArgument):
        run_point({"epsilon": 0})


@pytest.mark.parametrize("prep", ["0", "+", "-i"])
def test_purification_matches_direct_mixture(prep):
    for eps in EPS:
        for alpha in (0.0, 1.0, 2.7):
            cfg = prep_config(prep, epsilon=eps, r_prot=("Y", alpha))
            a = protocol.reduced_test_state(cfg).elements
            b = protocol.equivalent_test_dm(cfg).elements
            assert np.max(np.abs(a - b)) < 1e-9


@pytest.mark.parametrize("prep", ["0", "+"])
def test_purity_law_and_monotonicity(prep):
    purities = [run_point(prep_config(prep, epsilon=e)).test_purity for e in EPS]
    for e, p in zip(EPS, purities):
        assert abs(p - abs(math.cos(e))) < 1e-9
    assert all(b < a for a, b in zip(purities, purities[1:]))


# -- sweeps ----------------------------------------------------------------


def test_sweep_order_and_seeds():
    tmpl = derivation_config(shots=100, seed=99)
    res = run_sweep(tmpl, EPS[:2], ALPHA[:3])
    assert res.grid == tuple((e, a) for e in EPS[:2] for a in ALPHA[:3])
    single = run_point(tmpl.at(EPS[1], ALPHA[2], seed=99 ^ 5))
    assert res.records[5].counts == single.counts


def test_one_by_one_sweep_equals_run_point():
    tmpl = derivation_config(shots=64, seed=3)
    res = run_sweep(tmpl, [0.4], [1.2])
    pt = run_point(tmpl.at(0.4, 1.2))
    assert res.records[0] .p_joint_00_exact == pt.p_joint_00_exact
    assert res.records[0].counts == pt.counts


def test_empty_grid_rejected():
    with pytest.raises(InvalidArgument):
        run_sweep(derivation_config(), [], ALPHA)


@pytest.mark.parametrize("variant", [Variant.CSWAP, Variant.BSM, Variant.TOFFOLI])
def test_y_axis_rotation_gives_flat_quarter(variant):
    res = run_sweep(flat_y_config().at(0, 0, variant=variant), EPS, ALPHA)
    assert np.max(np.abs(res.column("p_one_exact") - 0.25)) < 1e-9


@pytest.mark.parametrize("variant", [Variant.CSWAP, Variant.BSM])
def test_follow_control_cannot_tell_zero_from_one(variant):
    a = run_sweep(follow_ctrl_config("0", variant), EPS, ALPHA).column("p_one_exact")
    b = run_sweep(follow_ctrl_config("1", variant), EPS, ALPHA).column("p_one_exact")
    assert np.max(np.abs(a - b)) < 1e-9


def test_follow_control_curves_depend_on_decoherence():
    # the curves themselves do vary with epsilon; only the 0/1 labels collapse
    col = run_sweep(follow_ctrl_config("0"), EPS, [0.0]).column("p_one_exact")
    assert col.max() - col.min() > 0.2


# -- closed forms ----------------------------------------------------------


def test_oracle_prob00_values():
    assert oracle_prob00(0, 0) == 0.625
    assert abs(oracle_prob00(math.pi / 2, 1.234) - 0.375) < 1e-15
    assert oracle_prob00(0, math.pi) == 0.125


def test_oracle_xaxis_values():
    assert oracle_prob00_xaxis(0, "+") == 0.5
    assert oracle_prob00_xaxis(0, "-") == 0.25
    assert abs(oracle_prob00_xaxis(math.pi / 2, "+") - 0.375) < 1e-15
    assert abs(oracle_prob00_xaxis(math.pi / 2, "-") - 0.375) < 1e-15
    with pytest.raises(InvalidArgument):
        oracle_prob00_xaxis(0, "?")


def test_verify_derivation_full_grid():
    worst = max(verify_derivation(e, a)["abs_err"] for e in EPS for a in ALPHA)
    assert worst < 1e-9


@pytest.mark.parametrize("prep", protocol.PAULI_LABELS)
def test_every_pauli_preparation_matches_its_closed_form(prep):
    worst = max(verify_derivation(e, a, prep)["abs_err"] for e in EPS[::3] for a in ALPHA[::4])
    assert worst < 1e-9


@pytest.mark.parametrize("prep", ["+", "-"])
def test_protocol_rotation_has_no_effect_on_x_axis_states(prep):
    for e in EPS:
        vals = [run_point(derivation_config(e, a, prep)).p_joint_00_exact for a in ALPHA]
        assert max(vals) - min(vals) < 1e-9
        assert abs(vals[0] - oracle_prob00_xaxis(e, prep)) < 1e-9


def test_zero_epsilon_reduces_to_pure_state_behaviour():
    # with no decoherence the test qubit is Rx(alpha)|0>; the combined outcome must vanish
    # exactly when it equals the control state |+> -- never, so P(1) stays positive
    for a in ALPHA:
        r = run_point(derivation_config(0.0, a))
        assert r.test_purity == pytest.approx(1.0, abs=1e-9)
        assert r.p_one_exact > 0


def test_pauli_curve_families_distinct_away_from_crossings():
    alphas = [a for a in ALPHA if min(abs(a), abs(a - math.pi / 2), abs(a - math.pi)) > 0.1]
    eps = EPS[1:-1]
    curves = {p: np.array([[verify_derivation(e, a, p)["simulated"] for a in alphas] for e in eps])
              for p in protocol.PAULI_LABELS}
    labels = list(curves)
    for i, p in enumerate(labels):
        for q in labels[i + 1:]:
            assert np.max(np.abs(curves[p] - curves[q])) > 1e-3, (p, q)
