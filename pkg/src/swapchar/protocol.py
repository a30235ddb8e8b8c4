"""Decoherence-characterisation experiment: configuration, sweeps and oracles.

A point of the experiment is fixed by the environment angle ``epsilon``
(entangling strength, 0 = pure test qubit, pi/2 = maximally mixed) and the
protocol angle ``alpha`` of the test-qubit rotation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import circuits, qcore, rng, swaptest
from .circuits import Variant
from .errors import InvalidArgument
from .qcore import H, X, DensityMatrix, StateVector, make_rotation

HALF_PI = math.pi / 2
_ANGLE_SLACK = 1e-12

# test-qubit preparations as rotations of |0>
PREP_ROTATIONS = {
    "0": ("Y", 0.0),
    "1": ("Y", math.pi),
    "+": ("Y", HALF_PI),
    "-": ("Y", -HALF_PI),
    "+i": ("X", -HALF_PI),
    "-i": ("X", HALF_PI),
}

PAULI_LABELS = tuple(PREP_ROTATIONS)


def ctrl_preparation(label):
    """Gate sequence taking |0> to the named Pauli eigenstate."""
    table = {
        "0": (),
        "1": (X,),
        "+": (H,),
        "-": (make_rotation("Y", -HALF_PI),),
        "+i": (make_rotation("X", -HALF_PI),),
        "-i": (make_rotation("X", HALF_PI),),
    }
    if label not in table:
        raise InvalidArgument(f"unknown control preparation {label!r}")
    return table[label]


FOLLOW = "follow"


@dataclass(frozen=True)
class ExperimentConfig:
    """One point of the experiment.

    ``u_ctrl`` is a Pauli-eigenstate label, ``"follow"`` (control prepared by
    the same rotation as the test qubit) or an explicit 2x2 unitary.
    """

    r_prep: tuple = ("Y", 0.0)
    u_ctrl: object = "+"
    epsilon: float = 0.0
    r_prot: tuple = ("X", 0.0)
    variant: Variant = Variant.TOFFOLI
    control_measurement: bool = True
    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        axis, angle = self.r_prep
        object.__setattr__(self, "r_prep", (str(axis).upper(), float(angle)))
        axis, angle = self.r_prot
        object.__setattr__(self, "r_prot", (str(axis).upper(), float(angle)))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "control_measurement", bool(self.control_measurement))
        object.__setattr__(self, "seed", int(self.seed))
        if not isinstance(self.u_ctrl, str):
            u = np.array(self.u_ctrl, dtype=complex)
            if u.shape != (2, 2) or np.max(np.abs(u @ u.conj().T - np.eye(2))) > 1e-10:
                raise InvalidArgument("explicit u_ctrl must be a 2x2 unitary")
            u.setflags(write=False)
            object.__setattr__(self, "u_ctrl", u)
        elif self.u_ctrl != FOLLOW:
            ctrl_preparation(self.u_ctrl)
        self.validate()

    def validate(self):
        for axis in (self.r_prep[0], self.r_prot[0]):
            if axis not in ("X", "Y", "Z"):
                raise InvalidArgument(f"rotation axis must be X, Y or Z, got {axis!r}")
        for name, val in (("epsilon", self.epsilon), ("alpha", self.alpha), ("r_prep angle", self.r_prep[1])):
            if not math.isfinite(val):
                raise InvalidArgument(f"{name} must be finite")
        if not -_ANGLE_SLACK <= self.epsilon <= HALF_PI + _ANGLE_SLACK:
            raise InvalidArgument(f"epsilon must lie in [0, pi/2], got {self.epsilon}")
        if not -_ANGLE_SLACK <= self.alpha <= math.pi + _ANGLE_SLACK:
            raise InvalidArgument(f"alpha must lie in [0, pi], got {self.alpha}")
        if self.shots is not None and int(self.shots) < 1:
            raise InvalidArgument("shots must be >= 1 when sampling")
        if self.variant is Variant.BSM and self.control_measurement:
            raise InvalidArgument("control measurement is defined for the CSWAP and Toffoli variants only")

    @property
    def alpha(self):
        return self.r_prot[1]

    def at(self, epsilon, alpha, **changes):
        return replace(self, epsilon=epsilon, r_prot=(self.r_prot[0], alpha), **changes)

    def prep_gates(self):
        return (make_rotation(*self.r_prep),)

    def prot_gate(self):
        return make_rotation(*self.r_prot)

    def ctrl_gates(self):
        if isinstance(self.u_ctrl, str):
            if self.u_ctrl == FOLLOW:
                return self.prep_gates()
            return ctrl_preparation(self.u_ctrl)
        return circuits.decompose_unitary(self.u_ctrl)

    def ctrl_state(self):
        state = StateVector.zero(1)
        for g in self.ctrl_gates():
            state = qcore.apply_gate(state, g, [0])
        return state

    def to_dict(self):
        u = self.u_ctrl
        if not isinstance(u, str):
            u = [[[float(z.real), float(z.imag)] for z in row] for row in u]
        return {
            "r_prep": {"axis": self.r_prep[0], "angle": self.r_prep[1]},
            "u_ctrl": u,
            "epsilon": self.epsilon,
            "r_prot": {"axis": self.r_prot[0], "angle": self.alpha},
            "variant": self.variant.value,
            "control_measurement": self.control_measurement,
            "shots": self.shots,
            "seed": self.seed,
        }


def prep_config(prep="0", **kwargs):
    """Config whose test qubit is prepared in the named Pauli eigenstate."""
    return ExperimentConfig(r_prep=PREP_ROTATIONS[prep], **kwargs)


def derivation_config(epsilon=0.0, alpha=0.0, prep="0", **kwargs):
    """Toffoli test with control measurement, control |+>, X-axis protocol rotation."""
    return prep_config(
        prep,
        u_ctrl="+",
        epsilon=epsilon,
        r_prot=("X", alpha),
        variant=Variant.TOFFOLI,
        control_measurement=True,
        **kwargs,
    )


def experiment_circuit(config):
    st = circuits.build_st(config.variant, config.control_measurement, config.ctrl_gates())
    return circuits.prepend_preamble(st, config)


def _preamble_circuit(config):
    ops = circuits.preamble_ops(config.epsilon, config.prep_gates(), config.prot_gate(), config.ctrl_gates())
    return circuits.Circuit(3, ops, {"env": 0, "test": 1, "control": 2})


def reduced_test_state(config):
    """Test-qubit reduced state after coupling, preparation and protocol rotation."""
    return qcore.partial_trace(circuits.simulate(_preamble_circuit(config)), [1])


def equivalent_test_dm(config):
    """Same state built directly as a single-qubit mixture, no environment qubit."""
    c2 = math.cos(config.epsilon / 2) ** 2
    dm = DensityMatrix(np.diag([c2, 1.0 - c2]).astype(complex))
    for g in config.prep_gates() + (config.prot_gate(),):
        dm = qcore.apply_gate_dm(dm, g, [0])
    return dm


# --------------------------------------------------------------------------
# closed forms


def oracle_prob00(epsilon, alpha):
    """P(ancilla=0, control=0) = 3/8 + cos(epsilon) cos(alpha) / 4 for a |0>-prepared test qubit."""
    return 3 / 8 + 0.25 * math.cos(epsilon) * math.cos(alpha)


def oracle_prob00_xaxis(epsilon, sign):
    """3/8 +- cos(epsilon)/8 for test states on the X axis (sign '+' for |+>)."""
    if sign in ("+", 1, +1):
        s = 1.0
    elif sign in ("-", -1):
        s = -1.0
    else:
        raise InvalidArgument(f"sign must be '+' or '-', got {sign!r}")
    return 3 / 8 + s * math.cos(epsilon) / 8


def oracle_prob00_pauli(epsilon, alpha, prep):
    """Closed form of P(0,0) for each Pauli-eigenstate preparation.

    Z axis: 3/8 +- cos(e)cos(a)/4; X axis: 3/8 +- cos(e)/8;
    Y axis: 3/8 +- cos(e)sin(a)/4.
    """
    if prep == "0":
        return oracle_prob00(epsilon, alpha)
    if prep == "1":
        return 3 / 8 - 0.25 * math.cos(epsilon) * math.cos(alpha)
    if prep in ("+", "-"):
        return oracle_prob00_xaxis(epsilon, prep)
    if prep in ("+i", "-i"):
        s = 1.0 if prep == "+i" else -1.0
        return 3 / 8 + s * 0.25 * math.cos(epsilon) * math.sin(alpha)
    raise InvalidArgument(f"unknown preparation {prep!r}")


def pauli_label(config):
    """Name of the Pauli eigenstate R_prep produces from |0>, or None."""
    state = qcore.apply_gate(StateVector.zero(1), config.prep_gates()[0], [0])
    for label in PAULI_LABELS:
        if abs(abs(state.overlap(qcore.basis_state(label))) - 1.0) < 1e-12:
            return label
    return None


def _is_derivation_family(config):
    if not (config.variant is Variant.TOFFOLI and config.control_measurement and config.r_prot[0] == "X"):
        return False
    ctrl = config.ctrl_state()
    return abs(abs(ctrl.overlap(qcore.basis_state("+"))) - 1.0) < 1e-12


def oracle_for(config):
    """(target_field, value) of the applicable closed form, or (None, None)."""
    if not config.control_measurement:
        rho = equivalent_test_dm(config)
        return "p_one", swaptest.oracle_p1_mixed(rho, config.ctrl_state())
    if _is_derivation_family(config):
        label = pauli_label(config)
        if label is not None:
            return "p_joint_00", oracle_prob00_pauli(config.epsilon, config.alpha, label)
    return None, None


# --------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class PointRecord:
    epsilon: float
    alpha: float
    p_one_exact: float
    p_joint_00_exact: float | None
    test_purity: float
    counts: qcore.CountsRecord | None = None
    p_sampled: float | None = None
    oracle: float | None = None
    oracle_target: str | None = None
    abs_err: float | None = None
    probs: dict | None = None


def run_point(config, sample=True):
    """Simulate one configuration exactly; sample counts when ``config.shots`` is set."""
    if not isinstance(config, ExperimentConfig):
        raise InvalidArgument("run_point expects an ExperimentConfig")
    config.validate()
    circuit = experiment_circuit(config)
    mode = swaptest.EXACT
    if sample and config.shots is not None:
        mode = swaptest.Shots(int(config.shots), config.seed)
    res = swaptest.run_circuit(circuit, None, mode)
    purity = qcore.bloch_norm(reduced_test_state(config))
    target, oracle = oracle_for(config)
    abs_err = None
    if target == "p_one":
        abs_err = abs(res.p_one - oracle)
    elif target == "p_joint_00":
        abs_err = abs(res.p_joint_00 - oracle)
    return PointRecord(
        epsilon=config.epsilon,
        alpha=config.alpha,
        p_one_exact=res.p_one,
        p_joint_00_exact=res.p_joint_00,
        test_purity=purity,
        counts=res.counts,
        p_sampled=res.p_sampled,
        oracle=oracle,
        oracle_target=target,
        abs_err=abs_err,
        probs=res.probs,
    )


@dataclass(frozen=True)
class SweepResult:
    template: ExperimentConfig
    grid: tuple
    records: tuple

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def max_abs_err(self):
        errs = [r.abs_err for r in self.records if r.abs_err is not None]
        return max(errs) if errs else None


def default_eps_grid():
    return [i * HALF_PI / 9 for i in range(10)]


def default_alpha_grid():
    return [j * math.pi / 19 for j in range(20)]


def point_configs(template, eps_grid, alpha_grid):
    eps_grid, alpha_grid = list(eps_grid), list(alpha_grid)
    if not eps_grid or not alpha_grid:
        raise InvalidArgument("epsilon and alpha grids must be non-empty")
    out = []
    for i, eps in enumerate(eps_grid):
        for j, alpha in enumerate(alpha_grid):
            index = i * len(alpha_grid) + j
            out.append(template.at(eps, alpha, seed=rng.derive_seed(template.seed, index)))
    return out


def run_sweep(template, eps_grid=None, alpha_grid=None, sample=True):
    """Row-major sweep (epsilon outer, alpha inner); point k uses seed base ^ k."""
    eps_grid = default_eps_grid() if eps_grid is None else list(eps_grid)
    alpha_grid = default_alpha_grid() if alpha_grid is None else list(alpha_grid)
    configs = point_configs(template, eps_grid, alpha_grid)
    records = tuple(run_point(c, sample) for c in configs)
    grid = tuple((c.epsilon, c.alpha) for c in configs)
    return SweepResult(template, grid, records)


def verify_derivation(epsilon, alpha, prep="0"):
    """Full simulation of P(0,0) against its closed form at one point."""
    config = derivation_config(epsilon, alpha, prep)
    sim = run_point(config, sample=False).p_joint_00_exact
    ref = oracle_prob00_pauli(epsilon, alpha, prep)
    return {"epsilon": epsilon, "alpha": alpha, "prep": prep, "simulated": sim, "oracle": ref,
            "abs_err": abs(sim - ref)}
