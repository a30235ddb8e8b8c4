"""Dense state-vector / density-matrix engine for up to five qubits.

Conventions
-----------
* Qubit 0 is the leftmost tensor factor, so basis index ``b`` of an n-qubit
  register has qubit 0 as its most significant bit.
* Bitstrings in probability tables and counts list the first requested qubit
  leftmost.
* Rotations are ``R_k(t) = exp(-i t P_k / 2)``.
* Global phases are kept as-is; comparisons go through probabilities or
  fidelities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from . import rng
from .errors import InvalidArgument

MAX_QUBITS = 5
ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{what} contains NaN or Inf")


def _n_qubits_for(dim):
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise InvalidArgument(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state of ``n_qubits`` qubits."""

    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        _check_finite(amps, "amplitudes")
        n = _n_qubits_for(amps.size)
        if n > MAX_QUBITS:
            raise InvalidArgument(f"at most {MAX_QUBITS} qubits are supported, got {n}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL:
            raise InvalidArgument(f"state is not normalised (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def zero(cls, n_qubits=1):
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps)

    @classmethod
    def from_unnormalised(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise InvalidArgument("cannot normalise the zero vector")
        return cls(amps / norm)

    def to_dm(self):
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self, other):
        return StateVector(np.kron(self.amplitudes, other.amplitudes))

    def overlap(self, other):
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    elements: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidArgument(f"density matrix must be square, got shape {rho.shape}")
        _check_finite(rho, "density matrix")
        n = _n_qubits_for(rho.shape[0])
        if n > MAX_QUBITS:
            raise InvalidArgument(f"at most {MAX_QUBITS} qubits are supported, got {n}")
        if np.max(np.abs(rho - rho.conj().T)) > ATOL:
            raise InvalidArgument("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > ATOL:
            raise InvalidArgument(f"density matrix trace is {tr!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < -1e-9:
            raise InvalidArgument("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def maximally_mixed(cls, n_qubits=1):
        d = 2**n_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def tensor(self, other):
        return DensityMatrix(np.kron(self.elements, other.elements))

    def purity(self):
        """tr(rho^2)."""
        return float(np.real(np.trace(self.elements @ self.elements)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.elements, dtype=dtype)


State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True, eq=False)
class UnitaryGate:
    """A named unitary acting on 1 to 3 qubits.

    ``params`` carries the rotation angle for RX/RY/RZ so the gate can be
    exported to OpenQASM and inverted without inspecting the matrix.
    """

    label: str
    matrix: np.ndarray
    params: tuple = ()

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidArgument(f"gate matrix must be square, got {mat.shape}")
        _check_finite(mat, "gate matrix")
        arity = _n_qubits_for(mat.shape[0])
        if arity > 3:
            raise InvalidArgument("gates act on at most three qubits")
        if np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0]))) > ATOL:
            raise InvalidArgument(f"gate {self.label} is not unitary")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def arity(self):
        return _n_qubits_for(self.matrix.shape[0])

    def adjoint(self):
        if self.label in ("RX", "RY", "RZ"):
            return make_rotation(self.label[1], -self.params[0])
        if self.label in SELF_INVERSE:
            return self
        return UnitaryGate(self.label + "_DG" if not self.label.endswith("_DG") else self.label[:-3],
                           self.matrix.conj().T)

    def __repr__(self):
        if self.params:
            return f"{self.label}({', '.join(repr(p) for p in self.params)})"
        return self.label


def make_rotation(axis, angle):
    """Rotation ``exp(-i angle P/2)`` about Pauli axis ``axis`` ('X', 'Y' or 'Z')."""
    axis = str(axis).upper()
    if axis not in PAULIS:
        raise InvalidArgument(f"unknown rotation axis {axis!r}")
    try:
        angle = float(angle)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"rotation angle must be a real number, got {angle!r}") from exc
    if not math.isfinite(angle):
        raise InvalidArgument("rotation angle must be finite")
    mat = math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * PAULIS[axis]
    return UnitaryGate("R" + axis, mat, (angle,))


_CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
_CCX = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]
_CSWAP = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 6, 5, 7]]

I = UnitaryGate("I", I2)
H = UnitaryGate("H", np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))
X = UnitaryGate("X", PAULI_X)
CNOT = UnitaryGate("CNOT", _CNOT)
CCX = UnitaryGate("CCX", _CCX)
CSWAP = UnitaryGate("CSWAP", _CSWAP)
SELF_INVERSE = frozenset({"I", "H", "X", "CNOT", "CCX", "CSWAP"})


def _validate_targets(n_qubits, targets, arity):
    targets = [int(t) for t in targets]
    if len(targets) != arity:
        raise InvalidArgument(f"gate acts on {arity} qubit(s) but {len(targets)} target(s) given")
    if len(set(targets)) != len(targets):
        raise InvalidArgument(f"duplicate targets {targets}")
    for t in targets:
        if not 0 <= t < n_qubits:
            raise InvalidArgument(f"target {t} out of range for {n_qubits} qubit(s)")
    return targets


def _apply_to_axes(tensor, mat, axes):
    # Contract gate columns with ``axes`` of ``tensor``; result axes restored in place.
    k = len(axes)
    g = mat.reshape([2] * (2 * k))
    out = np.tensordot(g, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply_gate(state, gate, targets):
    """Apply ``gate`` to ``targets`` of a pure state (first target = gate's MSB)."""
    n = state.n_qubits
    targets = _validate_targets(n, targets, gate.arity)
    psi = state.amplitudes.reshape([2] * n)
    psi = _apply_to_axes(psi, gate.matrix, targets)
    return StateVector(psi.reshape(-1))


def apply_gate_dm(dm, gate, targets):
    """rho -> U rho U^dagger with ``gate`` embedded on ``targets``."""
    n = dm.n_qubits
    targets = _validate_targets(n, targets, gate.arity)
    rho = dm.elements.reshape([2] * (2 * n))
    rho = _apply_to_axes(rho, gate.matrix, targets)
    rho = _apply_to_axes(rho, gate.matrix.conj(), [t + n for t in targets])
    rho = rho.reshape(2**n, 2**n)
    # symmetrise away round-off so the Hermiticity check never drifts
    return DensityMatrix((rho + rho.conj().T) / 2)


def apply(state, gate, targets):
    """Dispatch to :func:`apply_gate` or :func:`apply_gate_dm`."""
    if isinstance(state, DensityMatrix):
        return apply_gate_dm(state, gate, targets)
    return apply_gate(state, gate, targets)


def as_dm(state):
    return state if isinstance(state, DensityMatrix) else state.to_dm()


def partial_trace(dm, keep):
    """Reduced density matrix over ``keep`` (output ordered as given)."""
    dm = as_dm(dm)
    n = dm.n_qubits
    keep = [int(k) for k in keep]
    if not keep:
        raise InvalidArgument("keep list must not be empty")
    if len(set(keep)) != len(keep):
        raise InvalidArgument(f"duplicate qubits in keep list {keep}")
    for k in keep:
        if not 0 <= k < n:
            raise InvalidArgument(f"qubit {k} out of range for {n} qubit(s)")
    letters = "abcdefghij"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for q in range(n):
        if q not in keep:
            col[q] = row[q]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    subscripts = "".join(row) + "".join(col) + "->" + out
    red = np.einsum(subscripts, dm.elements.reshape([2] * (2 * n)))
    d = 2 ** len(keep)
    red = red.reshape(d, d)
    return DensityMatrix((red + red.conj().T) / 2)


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1 + 1e-9:
            raise InvalidArgument(f"Bloch vector norm {self.norm()!r} exceeds 1")

    def norm(self):
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    def to_dm(self):
        return DensityMatrix((I2 + self.x * PAULI_X + self.y * PAULI_Y + self.z * PAULI_Z) / 2)


def bloch_from_dm(dm):
    dm = as_dm(dm)
    if dm.n_qubits != 1:
        raise InvalidArgument("Bloch vectors are defined for single-qubit states only")
    rho = dm.elements
    return BlochVector(*(float(np.real(np.trace(P @ rho))) for P in (PAULI_X, PAULI_Y, PAULI_Z)))


def bloch_norm(dm):
    """Purity in the Bloch-length sense: 1 for pure, 0 for maximally mixed."""
    return bloch_from_dm(dm).norm()


def bitstrings(k):
    return [format(i, f"0{k}b") for i in range(2**k)]


def measure_probs(state, qubits):
    """Computational-basis outcome probabilities of ``qubits``.

    Returns a dict over all ``2**len(qubits)`` bitstrings in ascending order;
    the first listed qubit is the leftmost bit.
    """
    n = state.n_qubits
    qubits = [int(q) for q in qubits]
    if not qubits:
        raise InvalidArgument("no qubits to measure")
    if len(set(qubits)) != len(qubits):
        raise InvalidArgument(f"duplicate qubits {qubits}")
    for q in qubits:
        if not 0 <= q < n:
            raise InvalidArgument(f"qubit {q} out of range for {n} qubit(s)")
    if isinstance(state, DensityMatrix):
        diag = np.real(np.diagonal(state.elements))
    else:
        diag = np.abs(state.amplitudes) ** 2
    diag = np.clip(diag, 0.0, None).reshape([2] * n)
    others = tuple(q for q in range(n) if q not in qubits)
    marg = diag.sum(axis=others) if others else diag
    # remaining axes are in ascending qubit order; reorder to the requested order
    order = sorted(qubits)
    marg = np.transpose(marg, [order.index(q) for q in qubits]).reshape(-1)
    marg = marg / marg.sum()
    return {b: float(p) for b, p in zip(bitstrings(len(qubits)), marg)}


@dataclass(frozen=True)
class CountsRecord:
    """Bitstring -> count map; ``bit_order`` 'q0-left' means the first
    measured qubit is the leftmost character."""

    counts: Mapping[str, int]
    bit_order: str = "q0-left"
    qubits: tuple = ()

    def __post_init__(self):
        clean = {}
        width = None
        for key, val in self.counts.items():
            key = str(key)
            if not key or set(key) - {"0", "1"}:
                raise InvalidArgument(f"invalid bitstring {key!r}")
            if width is None:
                width = len(key)
            elif len(key) != width:
                raise InvalidArgument("bitstrings of different lengths in one record")
            if int(val) < 0 or int(val) != val:
                raise InvalidArgument(f"count for {key} must be a non-negative integer")
            clean[key] = int(val)
        if self.bit_order not in ("q0-left", "q0-right"):
            raise InvalidArgument(f"unknown bit order {self.bit_order!r}")
        object.__setattr__(self, "counts", dict(sorted(clean.items())))
        object.__setattr__(self, "qubits", tuple(self.qubits))

    @property
    def shots(self):
        return sum(self.counts.values())

    @property
    def width(self):
        return len(next(iter(self.counts))) if self.counts else 0

    def normalized(self):
        """Same record with bit order 'q0-left'."""
        if self.bit_order == "q0-left":
            return self
        return CountsRecord({k[::-1]: v for k, v in self.counts.items()}, "q0-left", self.qubits)

    def get(self, bits):
        return self.normalized().counts.get(bits, 0)

    def frequencies(self):
        rec = self.normalized()
        total = rec.shots
        if total == 0:
            raise InvalidArgument("record holds zero shots")
        return {k: v / total for k, v in rec.counts.items()}


def sample_counts(probs, shots, seed, qubits=()):
    """Draw ``shots`` outcomes from ``probs`` using the SplitMix64 stream.

    Outcome for shot i is the first bitstring (ascending order) whose
    cumulative probability exceeds u_i; see :mod:`swapchar.rng`.
    """
    shots = int(shots)
    if shots < 1:
        raise InvalidArgument("shots must be >= 1")
    keys = sorted(probs)
    p = np.clip(np.array([probs[k] for k in keys], dtype=float), 0.0, None)
    if p.sum() <= 0:
        raise InvalidArgument("probabilities sum to zero")
    cum = np.cumsum(p / p.sum())
    cum[-1] = 1.0
    u = rng.uniforms(seed, shots)
    idx = np.searchsorted(cum, u, side="right")
    hist = np.bincount(idx, minlength=len(keys))
    return CountsRecord({k: int(c) for k, c in zip(keys, hist) if c}, "q0-left", qubits)


_EIG_FLOOR = 1e-14


def _psd_sqrt(mat):
    w, v = np.linalg.eigh(mat)
    w[w < _EIG_FLOOR] = 0.0
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(rho, sigma):
    """F = tr sqrt(sqrt(rho) sigma sqrt(rho)), unsquared (1/sqrt(2) for |0> vs I/2)."""
    rho, sigma = as_dm(rho), as_dm(sigma)
    if rho.elements.shape != sigma.elements.shape:
        raise InvalidArgument("fidelity needs states of equal dimension")
    s = _psd_sqrt(rho.elements)
    inner = s @ sigma.elements @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    # round-off eigenvalues of rank-deficient products would be inflated by sqrt
    w[w < _EIG_FLOOR] = 0.0
    f = float(np.sum(np.sqrt(w)))
    return min(max(f, 0.0), 1.0)


def basis_state(label):
    """Single-qubit Pauli eigenstate by name: 0, 1, +, -, +i, -i."""
    s = 1 / math.sqrt(2)
    table = {
        "0": [1, 0],
        "1": [0, 1],
        "+": [s, s],
        "-": [s, -s],
        "+i": [s, 1j * s],
        "-i": [s, -1j * s],
    }
    if label not in table:
        raise InvalidArgument(f"unknown basis state {label!r}")
    return StateVector(table[label])


def unitary_preparing(state):
    """A single-qubit unitary whose first column is ``state``."""
    if state.n_qubits != 1:
        raise InvalidArgument("expected a single-qubit state")
    a, b = state.amplitudes
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)


def zyz_angles(matrix):
    """Angles (phi, theta, lam) with U = e^{i g} Rz(phi) Ry(theta) Rz(lam)."""
    u = np.asarray(matrix, dtype=complex)
    det = np.linalg.det(u)
    su = u / np.sqrt(det)
    theta = 2 * math.atan2(abs(su[1, 0]), abs(su[0, 0]))
    plus = np.angle(su[1, 1]) if abs(su[1, 1]) > 1e-12 else 0.0
    minus = np.angle(su[1, 0]) if abs(su[1, 0]) > 1e-12 else 0.0
    # su[1,1] = e^{i(phi+lam)/2} cos(theta/2), su[1,0] = e^{i(phi-lam)/2} sin(theta/2)
    phi = plus + minus
    lam = plus - minus
    return float(phi), float(theta), float(lam)


def random_pure_state(generator, n_qubits=1):
    """Haar-random pure state drawn with a numpy ``Generator``."""
    z = generator.normal(size=2**n_qubits) + 1j * generator.normal(size=2**n_qubits)
    return StateVector.from_unnormalised(z)


def random_density_matrix(generator, n_qubits=1):
    """Random full-rank mixed state (Ginibre ensemble)."""
    d = 2**n_qubits
    g = generator.normal(size=(d, d)) + 1j * generator.normal(size=(d, d))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho)
    return DensityMatrix((rho + rho.conj().T) / 2)
