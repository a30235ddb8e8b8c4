"""Circuit IR, Swap Test builders, experiment preamble and OpenQASM 2.0 export.

Register layout when everything is present is ``[env, test, ctrl, ancilla]``.
Builders return circuits without the environment qubit; the preamble widens
them by inserting ``env`` at index 0.

Inside the BSM and Toffoli tests the Bell-basis rotation is a CNOT with the
control qubit as CNOT control and the test qubit as CNOT target, followed by H
on the control rail.  The "both bits 1" statistics are symmetric under
swapping that orientation, but with the control measurement enabled only this
orientation keeps the control rail as the one that is un-prepared by U_ctrl^†.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace


from . import qcore
from .errors import InvalidArgument, UnsupportedGateError
from .qcore import CCX, CNOT, CSWAP, H, StateVector, UnitaryGate, make_rotation

ROLES = ("env", "test", "control", "ancilla")


class Variant(str, enum.Enum):
    CSWAP = "cswap"
    BSM = "bsm"
    TOFFOLI = "toffoli"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown Swap Test variant {value!r}") from None


class PostProcess(str, enum.Enum):
    """How measured bits reduce to the single Swap Test outcome."""

    ANCILLA = "ancilla"  # outcome is the ancilla bit
    AND = "and"  # BSM: 1 iff both data qubits read 1
    OR = "or"  # control measurement: ancilla OR control


@dataclass(frozen=True)
class CircuitOp:
    gate: UnitaryGate
    targets: tuple

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise InvalidArgument(f"duplicate targets {self.targets}")
        if len(self.targets) != self.gate.arity:
            raise InvalidArgument(f"{self.gate.label} needs {self.gate.arity} target(s)")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple = ()
    roles: dict = field(default_factory=dict)
    measured: tuple = ()
    postprocess: PostProcess = PostProcess.ANCILLA
    variant: Variant | None = None

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "measured", tuple(sorted(int(q) for q in self.measured)))
        for op in self.ops:
            if any(not 0 <= t < self.n_qubits for t in op.targets):
                raise InvalidArgument(f"{op.gate.label} targets {op.targets} outside width {self.n_qubits}")
        for q in self.measured:
            if not 0 <= q < self.n_qubits:
                raise InvalidArgument(f"measured qubit {q} out of range")
        if len(set(self.measured)) != len(self.measured):
            raise InvalidArgument("qubit measured twice")
        idx = list(self.roles.values())
        if len(set(idx)) != len(idx):
            raise InvalidArgument("two roles share a qubit")
        for role, q in self.roles.items():
            if role not in ROLES:
                raise InvalidArgument(f"unknown role {role!r}")
            if not 0 <= q < self.n_qubits:
                raise InvalidArgument(f"role {role} on qubit {q} out of range")

    def qubit(self, role):
        return self.roles[role]

    @property
    def measured_roles(self):
        inv = {q: r for r, q in self.roles.items()}
        return tuple(inv.get(q, f"q{q}") for q in self.measured)

    def then(self, gate, *targets):
        return replace(self, ops=self.ops + (CircuitOp(gate, targets),))


def _as_gate_seq(u_ctrl):
    if u_ctrl is None:
        return ()
    if isinstance(u_ctrl, UnitaryGate):
        return (u_ctrl,)
    return tuple(u_ctrl)


def adjoint_sequence(gates):
    return tuple(g.adjoint() for g in reversed(_as_gate_seq(gates)))


def _data_layout():
    return {"test": 0, "control": 1}


def build_cswap_st(with_control_measurement=False, u_ctrl=None):
    """Ancilla-based Swap Test on (test, control); ancilla is the last qubit."""
    roles = {"test": 0, "control": 1, "ancilla": 2}
    a, t, c = 2, 0, 1
    ops = [CircuitOp(H, [a]), CircuitOp(CSWAP, [a, t, c]), CircuitOp(H, [a])]
    measured = [a]
    post = PostProcess.ANCILLA
    if with_control_measurement:
        ops += [CircuitOp(g, [c]) for g in adjoint_sequence(u_ctrl)]
        measured.append(c)
        post = PostProcess.OR
    return Circuit(3, ops, roles, measured, post, Variant.CSWAP)


def build_bsm_st():
    """Ancilla-free Bell-measurement Swap Test; outcome is the AND of both bits."""
    t, c = 0, 1
    ops = [CircuitOp(CNOT, [c, t]), CircuitOp(H, [c])]
    return Circuit(2, ops, _data_layout(), [t, c], PostProcess.AND, Variant.BSM)


def build_toffoli_st(with_control_measurement=False, u_ctrl=None):
    """BSM Swap Test whose AND is computed coherently by a Toffoli onto an ancilla."""
    roles = {"test": 0, "control": 1, "ancilla": 2}
    t, c, a = 0, 1, 2
    ops = [CircuitOp(CNOT, [c, t]), CircuitOp(H, [c]), CircuitOp(CCX, [t, c, a])]
    measured = [a]
    post = PostProcess.ANCILLA
    if with_control_measurement:
        ops += [CircuitOp(g, [c]) for g in adjoint_sequence(u_ctrl)]
        measured.append(c)
        post = PostProcess.OR
    return Circuit(3, ops, roles, measured, post, Variant.TOFFOLI)


def build_st(variant, with_control_measurement=False, u_ctrl=None):
    variant = Variant.parse(variant)
    if variant is Variant.CSWAP:
        return build_cswap_st(with_control_measurement, u_ctrl)
    if variant is Variant.TOFFOLI:
        return build_toffoli_st(with_control_measurement, u_ctrl)
    if with_control_measurement:
        raise InvalidArgument("the BSM variant already measures the control qubit")
    return build_bsm_st()


def shift(circuit, offset):
    """Circuit widened by ``offset`` fresh qubits at the front."""
    ops = [CircuitOp(op.gate, [t + offset for t in op.targets]) for op in circuit.ops]
    roles = {r: q + offset for r, q in circuit.roles.items()}
    return replace(
        circuit,
        n_qubits=circuit.n_qubits + offset,
        ops=tuple(ops),
        roles=roles,
        measured=tuple(q + offset for q in circuit.measured),
    )


def preamble_ops(epsilon, r_prep, r_prot, u_ctrl, env=0, test=1, ctrl=2):
    """Gate list that prepares the (env, test, ctrl) inputs of an experiment.

    The coupling acts on the test qubit while it is still |0>, so the
    decohered Bloch vector has length |cos(epsilon)| and points along the
    prepared direction:

        Ry(epsilon) on env; CNOT env->test; R_prep, R_prot on test; U_ctrl on ctrl
    """
    ops = [
        CircuitOp(make_rotation("Y", epsilon), [env]),
        CircuitOp(CNOT, [env, test]),
    ]
    for gate in _as_gate_seq(r_prep):
        ops.append(CircuitOp(gate, [test]))
    for gate in _as_gate_seq(r_prot):
        ops.append(CircuitOp(gate, [test]))
    for gate in _as_gate_seq(u_ctrl):
        ops.append(CircuitOp(gate, [ctrl]))
    return ops


def prepend_preamble(circuit, config):
    """Insert the environment qubit and the preparation stage before ``circuit``.

    ``config`` is an ExperimentConfig (anything exposing ``epsilon``,
    ``prep_gates()``, ``prot_gate()`` and ``ctrl_gates()``).
    """
    for value in (config.epsilon, config.alpha):
        if not math.isfinite(value):
            raise InvalidArgument("preamble angles must be finite")
    wide = shift(circuit, 1)
    roles = dict(wide.roles)
    roles["env"] = 0
    pre = preamble_ops(
        config.epsilon,
        config.prep_gates(),
        config.prot_gate(),
        config.ctrl_gates(),
        env=0,
        test=roles["test"],
        ctrl=roles["control"],
    )
    return replace(wide, ops=tuple(pre) + wide.ops, roles=roles)


def simulate(circuit, initial=None):
    """Final state of ``circuit`` applied to ``initial`` (default all-zero)."""
    state = StateVector.zero(circuit.n_qubits) if initial is None else initial
    if state.n_qubits != circuit.n_qubits:
        raise InvalidArgument(
            f"initial state has {state.n_qubits} qubit(s), circuit needs {circuit.n_qubits}"
        )
    for op in circuit.ops:
        state = qcore.apply(state, op.gate, op.targets)
    return state


def outcome_probs(circuit, initial=None):
    """Probability table over the measured qubits (ascending qubit index, leftmost first)."""
    return qcore.measure_probs(simulate(circuit, initial), circuit.measured)


def combine(bits, postprocess):
    """Reduce a measured bitstring to the single Swap Test outcome."""
    vals = [int(b) for b in bits]
    if postprocess is PostProcess.AND:
        return int(all(vals))
    if postprocess is PostProcess.OR:
        return int(any(vals))
    if len(vals) != 1:
        raise InvalidArgument("ancilla post-processing expects one bit")
    return vals[0]


def p_one_from(table, postprocess):
    """Probability (or frequency) of combined outcome 1 from a bitstring table."""
    return float(sum(p for bits, p in table.items() if combine(bits, postprocess)))


# --------------------------------------------------------------------------
# OpenQASM 2.0

_QASM_NAMES = {
    "H": "h",
    "X": "x",
    "RX": "rx",
    "RY": "ry",
    "RZ": "rz",
    "CNOT": "cx",
    "CCX": "ccx",
    "CSWAP": "cswap",
}


def _fmt_angle(x):
    return repr(float(x))


def to_openqasm(circuit):
    """OpenQASM 2.0 text; one creg bit per measured qubit in ascending order."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.n_qubits}];"]
    if circuit.measured:
        lines.append(f"creg c[{len(circuit.measured)}];")
    for op in circuit.ops:
        label = op.gate.label
        if label == "I":
            continue
        name = _QASM_NAMES.get(label)
        if name is None:
            raise UnsupportedGateError(f"gate {label!r} has no OpenQASM 2.0 mapping")
        args = ",".join(f"q[{t}]" for t in op.targets)
        if op.gate.params:
            params = ",".join(_fmt_angle(p) for p in op.gate.params)
            lines.append(f"{name}({params}) {args};")
        else:
            lines.append(f"{name} {args};")
    for i, q in enumerate(circuit.measured):
        lines.append(f"measure q[{q}] -> c[{i}];")
    return "\n".join(lines) + "\n"


def decompose_unitary(matrix):
    """Single-qubit unitary as supported gates (Rz, Ry, Rz), equal up to global phase."""
    phi, theta, lam = qcore.zyz_angles(matrix)
    gates = []
    for axis, angle in (("Z", lam), ("Y", theta), ("Z", phi)):
        if abs(angle) > 1e-15:
            gates.append(make_rotation(axis, angle))
    return tuple(gates)
