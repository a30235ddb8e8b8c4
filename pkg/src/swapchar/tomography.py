"""Single-qubit state tomography and post-Swap-Test state analysis.

Pauli-basis measurements rotate the qubit before a Z-basis readout:
X basis -> H; Y basis -> Rz(-pi/2) (S^dagger up to phase) then H; Z basis -> nothing.
Outcome 0 is the +1 eigenvalue in every basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import circuits, protocol, qcore
from .circuits import Circuit, CircuitOp, Variant
from .errors import DegenerateBranchError, InvalidArgument
from .qcore import H, BlochVector, DensityMatrix, make_rotation

BASIS_CHANGE = {
    "X": (H,),
    "Y": (make_rotation("Z", -math.pi / 2), H),
    "Z": (),
}

UNCONDITIONAL = "unconditional"
ANCILLA_ZERO = "ancilla_zero"


@dataclass(frozen=True)
class PauliExpectations:
    ex: float
    ey: float
    ez: float

    def norm(self):
        return math.sqrt(self.ex**2 + self.ey**2 + self.ez**2)


@dataclass(frozen=True)
class QSTResult:
    dm: DensityMatrix
    expectations: PauliExpectations
    projected: bool


def reconstruct(ex, ey, ez):
    """(I + ex X + ey Y + ez Z) / 2."""
    return BlochVector(ex, ey, ez).to_dm()


def qst_exact(dm):
    """Reconstruct a single-qubit state from its exact Pauli expectations."""
    dm = qcore.as_dm(dm)
    if dm.n_qubits != 1:
        raise InvalidArgument("tomography is single-qubit only")
    b = qcore.bloch_from_dm(dm)
    return reconstruct(b.x, b.y, b.z)


def _expectation(counts):
    rec = counts.normalized()
    if rec.width not in (0, 1):
        raise InvalidArgument("tomography counts must be single-bit outcomes")
    n0, n1 = rec.counts.get("0", 0), rec.counts.get("1", 0)
    total = n0 + n1
    if total == 0:
        raise InvalidArgument("a tomography basis has zero shots")
    return (n0 - n1) / total


def qst_from_counts(counts_x, counts_y, counts_z):
    """Linear-inversion tomography from counts in the X, Y and Z bases.

    If sampling noise pushes the Bloch vector outside the unit ball it is
    scaled back to norm 1 and ``projected`` is set.
    """
    exp = PauliExpectations(_expectation(counts_x), _expectation(counts_y), _expectation(counts_z))
    r = np.array([exp.ex, exp.ey, exp.ez])
    norm = float(np.linalg.norm(r))
    projected = norm > 1.0
    if projected:
        r = r / norm
    return QSTResult(reconstruct(*r), exp, projected)


def measurement_circuit(prep_gates=(), basis="Z"):
    """One-qubit circuit: preparation gates, basis change, measure."""
    ops = [CircuitOp(g, [0]) for g in prep_gates]
    ops += [CircuitOp(g, [0]) for g in BASIS_CHANGE[basis]]
    return Circuit(1, ops, {"test": 0}, [0])


def pauli_counts(dm, shots, seed):
    """Sample counts for each Pauli basis; bases use seeds seed, seed+1, seed+2."""
    dm = qcore.as_dm(dm)
    out = {}
    for k, basis in enumerate("XYZ"):
        rotated = dm
        for g in BASIS_CHANGE[basis]:
            rotated = qcore.apply_gate_dm(rotated, g, [0])
        probs = qcore.measure_probs(rotated, [0])
        out[basis] = qcore.sample_counts(probs, shots, seed + k)
    return out


def sampled_qst(dm, shots, seed):
    c = pauli_counts(dm, shots, seed)
    return qst_from_counts(c["X"], c["Y"], c["Z"])


@dataclass(frozen=True)
class PostSTStates:
    c_out: DensityMatrix
    t_out: DensityMatrix
    fidelity_ctrl: float
    fidelity_test: float
    purity_ctrl: float
    purity_test: float
    branch_probability: float


def post_st_states(config, conditioning=ANCILLA_ZERO):
    """Control and test states after the ancilla-based Swap Test.

    Only the CSWAP variant leaves the data qubits in place, so other variants
    are rejected.  With ``ancilla_zero`` the joint state is projected onto the
    ancilla-0 branch and renormalised before tracing out.
    """
    if config.variant is not Variant.CSWAP:
        raise InvalidArgument("post-test states are defined for the CSWAP variant")
    if conditioning not in (UNCONDITIONAL, ANCILLA_ZERO):
        raise InvalidArgument(f"unknown conditioning {conditioning!r}")
    st = circuits.build_cswap_st(False)
    circ = circuits.prepend_preamble(st, config)
    final = qcore.as_dm(circuits.simulate(circ))
    t, c, a = circ.roles["test"], circ.roles["control"], circ.roles["ancilla"]
    branch = 1.0
    if conditioning == ANCILLA_ZERO:
        n = final.n_qubits
        keep = np.array([((i >> (n - 1 - a)) & 1) == 0 for i in range(2**n)])
        proj = final.elements * np.outer(keep, keep)
        branch = float(np.real(np.trace(proj)))
        if branch < 1e-12:
            raise DegenerateBranchError("ancilla=0 branch has zero probability")
        final = DensityMatrix(proj / branch)
    t_out = qcore.partial_trace(final, [t])
    c_out = qcore.partial_trace(final, [c])
    t_in = protocol.reduced_test_state(config)
    c_in = config.ctrl_state()
    return PostSTStates(
        c_out=c_out,
        t_out=t_out,
        fidelity_ctrl=qcore.state_fidelity(c_out, c_in),
        fidelity_test=qcore.state_fidelity(t_out, t_in),
        purity_ctrl=qcore.bloch_norm(c_out),
        purity_test=qcore.bloch_norm(t_out),
        branch_probability=branch,
    )
