"""Run Swap Test variants on single-qubit inputs and the matching closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circuits, qcore
from .circuits import PostProcess, Variant
from .errors import InvalidArgument
from .qcore import CountsRecord, DensityMatrix, StateVector, UnitaryGate

EXACT = "exact"


@dataclass(frozen=True)
class Shots:
    n: int
    seed: int


@dataclass(frozen=True)
class STResult:
    variant: Variant
    p_one: float
    p_joint_00: float | None = None
    counts: CountsRecord | None = None
    p_sampled: float | None = None
    probs: dict | None = None

    @property
    def p_zero(self):
        return 1.0 - self.p_one


def combine_measurements(ancilla_bit, ctrl_bit):
    """Combined outcome of the control-measurement extension: ctrl OR ancilla."""
    for b in (ancilla_bit, ctrl_bit):
        if b not in (0, 1):
            raise InvalidArgument(f"bits must be 0 or 1, got {b!r}")
    return int(ctrl_bit or ancilla_bit)


def oracle_p1_pure(fidelity_sq):
    """P(1) = (1 - |<psi|phi>|^2) / 2 for pure inputs."""
    f = float(fidelity_sq)
    if not 0.0 <= f <= 1.0:
        raise InvalidArgument(f"squared overlap must lie in [0, 1], got {f}")
    return (1.0 - f) / 2.0


_SINGLET = StateVector(np.array([0, 1, -1, 0]) / math.sqrt(2))


def singlet_projection_prob(psi, phi):
    """|<psi^-| (|phi> (x) |psi>)|^2, zero exactly when the inputs coincide."""
    if psi.n_qubits != 1 or phi.n_qubits != 1:
        raise InvalidArgument("singlet projection takes single-qubit states")
    return abs(_SINGLET.overlap(phi.tensor(psi))) ** 2


def overlap_sq(psi, phi):
    return abs(psi.overlap(phi)) ** 2


def _single(state, name):
    if state.n_qubits != 1:
        raise InvalidArgument(f"{name} must be a single-qubit state, got {state.n_qubits} qubits")


def st_circuit(variant, with_control_measurement=False, u_ctrl=None):
    return circuits.build_st(variant, with_control_measurement, u_ctrl)


def _initial_state(circuit, test_input, ctrl_input):
    width = circuit.n_qubits
    if isinstance(test_input, DensityMatrix) or isinstance(ctrl_input, DensityMatrix):
        state = qcore.as_dm(test_input).tensor(qcore.as_dm(ctrl_input))
        if width == 3:
            state = state.tensor(StateVector.zero(1).to_dm())
        return state
    state = test_input.tensor(ctrl_input)
    if width == 3:
        state = state.tensor(StateVector.zero(1))
    return state


def run_circuit(circuit, initial=None, mode=EXACT):
    """Simulate ``circuit`` and reduce its measurement to an :class:`STResult`."""
    probs = circuits.outcome_probs(circuit, initial)
    p_one = circuits.p_one_from(probs, circuit.postprocess)
    p00 = None
    if circuit.postprocess is PostProcess.OR:
        p00 = probs["0" * len(circuit.measured)]
    counts = p_sampled = None
    if mode != EXACT:
        if not isinstance(mode, Shots):
            raise InvalidArgument(f"mode must be 'exact' or Shots(n, seed), got {mode!r}")
        counts = qcore.sample_counts(probs, mode.n, mode.seed, circuit.measured_roles)
        p_sampled = circuits.p_one_from(counts.frequencies(), circuit.postprocess)
    return STResult(circuit.variant, p_one, p00, counts, p_sampled, probs)


def run_st(variant, test_input, ctrl_input, mode=EXACT, with_control_measurement=False):
    """Swap Test between a test state (pure or mixed) and a pure control state.

    With ``with_control_measurement`` the control qubit is rotated back by the
    adjoint of a unitary preparing ``ctrl_input`` from |0> and measured; the
    combined outcome is ancilla OR control.
    """
    _single(test_input, "test input")
    _single(ctrl_input, "control input")
    u_ctrl = None
    if with_control_measurement:
        if not isinstance(ctrl_input, StateVector):
            raise InvalidArgument("control measurement needs a pure control state")
        u_ctrl = UnitaryGate("U", qcore.unitary_preparing(ctrl_input))
    circuit = st_circuit(variant, with_control_measurement, u_ctrl)
    return run_circuit(circuit, _initial_state(circuit, test_input, ctrl_input), mode)


def oracle_p1_mixed(rho, sigma):
    """(1 - tr(rho sigma)) / 2, the mixed-input generalisation of the pure law."""
    ov = float(np.real(np.trace(qcore.as_dm(rho).elements @ qcore.as_dm(sigma).elements)))
    return (1.0 - ov) / 2.0
