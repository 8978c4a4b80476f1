"""Quantum circuits for the lattice model and a statevector simulator to check them.

Qubit ``j`` holds fermion mode ``j`` under the Jordan-Wigner map of
:mod:`latcft.fock`; qubit 0 is the most significant bit.  Two-mode gates act
on adjacent qubits and are defined through the local operators
``c0 = (Z + iY)/2 (x) 1`` and ``c1 = X (x) (Z + iY)/2``; the string on earlier
qubits cancels in every bilinear.

A number-conserving gate with two-by-two matrix ``u`` satisfies
``G c+_p G+ = sum_q u_qp c+_q``; a sequence of such gates composes to
``u_last ... u_first``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateGroundState, NonHermitianObservable, TooManyQubits
from .fock import PAULI, parity_operator, to_fock
from .lattice import LatticeSpec, QuadraticOperator, diagonalize, fourier_matrix

MAX_SIM_QUBITS = 20

_L = 0.5 * (PAULI["Z"] + 1j * PAULI["Y"])
_C0 = np.kron(_L, PAULI["I"])
_C1 = np.kron(PAULI["X"], _L)
_MINUS = np.array([1.0, -1.0]) / np.sqrt(2)  # the empty-mode state |<-|
_HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _number_generator(K: np.ndarray) -> np.ndarray:
    c = (_C0, _C1)
    return sum(K[a, b] * c[a].conj().T @ c[b] for a in range(2) for b in range(2))


def number_conserving_matrix(u: np.ndarray) -> np.ndarray:
    """Local 4x4 unitary of the two-mode gate with mode matrix ``u``."""
    K = -1j * sla.logm(np.asarray(u, dtype=complex))
    K = 0.5 * (K + K.conj().T)
    return sla.expm(1j * _number_generator(K))


def bogoliubov_matrix_2(theta: float, phi: float) -> np.ndarray:
    """``exp(theta (e^{i phi} c0+ c1+ - h.c.))`` on two adjacent modes."""
    X = np.exp(1j * phi) * _C0.conj().T @ _C1.conj().T
    return sla.expm(theta * (X - X.conj().T))


@dataclass(frozen=True)
class Gate:
    """One gate; ``params`` depend on ``name`` (see :func:`gate_matrix`)."""

    name: str
    qubits: tuple
    params: tuple = ()

    def line(self) -> str:
        def fmt(p):
            if isinstance(p, str):
                return p
            if isinstance(p, complex) or np.iscomplexobj(p):
                return f"{complex(p).real:.17g}{complex(p).imag:+.17g}j"
            return f"{float(p):.17g}"

        ps = []
        for p in self.params:
            if isinstance(p, np.ndarray):
                ps.extend(fmt(x) for x in p.ravel())
            else:
                ps.append(fmt(p))
        return " ".join([self.name, ",".join(map(str, self.qubits))] + ps)


_FIXED = {
    "fourier": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "fswap": np.array([[0, 1], [1, 0]]),
}


_FIXED_LOCAL = {k: number_conserving_matrix(v) for k, v in _FIXED.items()}


def gate_matrix(g: Gate) -> np.ndarray | None:
    """Dense local matrix of a gate, or ``None`` for string gates."""
    if g.name in _FIXED:
        return _FIXED_LOCAL[g.name]
    if g.name == "modes":
        return number_conserving_matrix(np.asarray(g.params[0]).reshape(2, 2))
    if g.name == "bogoliubov":
        return bogoliubov_matrix_2(*g.params)
    if g.name == "phase":
        n = 0.5 * (PAULI["I"] + PAULI["X"])
        return sla.expm(1j * g.params[0] * n)
    if g.name == "hadamard":
        return _HADAMARD
    if g.name in ("unitary", "controlled_unitary"):
        return np.asarray(g.params[0])
    return None


def mode_matrix(g: Gate) -> np.ndarray | None:
    """Two-by-two (or one-by-one) mode matrix of a number-conserving gate."""
    if g.name in _FIXED:
        return _FIXED[g.name].astype(complex)
    if g.name == "modes":
        return np.asarray(g.params[0], dtype=complex).reshape(2, 2)
    if g.name == "phase":
        return np.array([[np.exp(1j * g.params[0])]])
    return None


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` system qubits plus ``n_ancillas``."""

    n_qubits: int
    gates: list = field(default_factory=list)
    n_ancillas: int = 0

    @property
    def width(self) -> int:
        return self.n_qubits + self.n_ancillas

    def add(self, name: str, qubits, *params) -> "Circuit":
        qubits = tuple(int(q) for q in qubits)
        if any(q < 0 or q >= self.width for q in qubits):
            raise ValueError(f"gate {name} on undeclared qubits {qubits}")
        for p in params:
            if isinstance(p, (int, float, complex)) and not np.isfinite(p):
                raise ValueError(f"gate {name} has a non-finite parameter")
        self.gates.append(Gate(name, qubits, tuple(params)))
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        self.gates.extend(other.gates)
        return self

    def inverse(self) -> "Circuit":
        out = Circuit(self.n_qubits, [], self.n_ancillas)
        for g in reversed(self.gates):
            out.gates.append(_inverse_gate(g))
        return out

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates)

    def to_text(self) -> str:
        head = f"qubits {self.n_qubits} ancillas {self.n_ancillas}"
        return "\n".join([head] + [g.line() for g in self.gates]) + "\n"


def _inverse_gate(g: Gate) -> Gate:
    if g.name in ("fswap", "pauli", "global_phase_pi"):
        return g
    if g.name == "fourier":
        return g  # real symmetric and involutive
    if g.name == "modes":
        u = np.asarray(g.params[0]).reshape(2, 2)
        return Gate("modes", g.qubits, (u.conj().T.copy(),))
    if g.name == "bogoliubov":
        return Gate("bogoliubov", g.qubits, (-g.params[0], g.params[1]))
    if g.name == "phase":
        return Gate("phase", g.qubits, (-g.params[0],))
    if g.name == "pauli_rotation":
        return Gate("pauli_rotation", g.qubits, (-g.params[0], g.params[1]))
    if g.name == "global_phase":
        return Gate("global_phase", g.qubits, (-g.params[0],))
    if g.name == "hadamard":
        return g
    if g.name in ("unitary", "controlled_unitary"):
        return Gate(g.name, g.qubits, (np.asarray(g.params[0]).conj().T,))
    if g.name == "branch":
        s0, c0, s1, c1 = g.params
        return Gate("branch", g.qubits, (s0, np.conj(c0), s1, np.conj(c1)))
    raise ValueError(f"no inverse for gate {g.name}")


# ---------------------------------------------------------------------------
# simulator


def _apply_local(psi: np.ndarray, U: np.ndarray, qubits, n: int) -> np.ndarray:
    k = len(qubits)
    t = psi.reshape((2,) * n + (-1,))
    t = np.tensordot(U.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(t, list(range(k)), list(qubits)).reshape(psi.shape)


def _apply_string(psi: np.ndarray, letters: str, qubits, n: int) -> np.ndarray:
    for q, c in zip(qubits, letters):
        if c != "I":
            psi = _apply_local(psi, PAULI[c], (q,), n)
    return psi


def apply_gate(psi: np.ndarray, g: Gate, n: int) -> np.ndarray:
    if g.name == "pauli_rotation":
        theta, letters = g.params
        return np.cos(theta) * psi - 1j * np.sin(theta) * _apply_string(psi, letters, g.qubits, n)
    if g.name == "pauli":
        return _apply_string(psi, g.params[0], g.qubits, n)
    if g.name == "global_phase":
        return np.exp(1j * g.params[0]) * psi
    if g.name == "branch":
        # qubits = (ancilla, system...): |0><0| (x) c0 P0 + |1><1| (x) c1 P1
        s0, c0, s1, c1 = g.params
        anc, sysq = g.qubits[0], g.qubits[1:]
        t = psi.reshape((2,) * n + (-1,))
        parts = []
        for bit, (s, c) in enumerate(((s0, c0), (s1, c1))):
            proj = np.zeros_like(t)
            idx = [slice(None)] * n
            idx[anc] = bit
            proj[tuple(idx)] = t[tuple(idx)]
            parts.append(c * _apply_string(proj.reshape(psi.shape), s, sysq, n))
        return parts[0] + parts[1]
    U = gate_matrix(g)
    if U is None:
        raise ValueError(f"unknown gate {g.name}")
    return _apply_local(psi, U, g.qubits, n)


def statevector_simulate(circuit: Circuit, psi: np.ndarray | None = None) -> np.ndarray:
    """Exact amplitudes after running ``circuit`` (default input: all modes empty).

    Raises
    ------
    TooManyQubits
        Above ``MAX_SIM_QUBITS`` qubits.
    """
    n = circuit.width
    if n > MAX_SIM_QUBITS:
        raise TooManyQubits(f"{n} qubits exceed the simulator limit {MAX_SIM_QUBITS}")
    psi = empty_state(n) if psi is None else np.asarray(psi, dtype=complex).copy()
    if psi.shape[0] != 2**n or psi.ndim > 2:
        raise ValueError(f"input state has wrong dimension for {n} qubits")
    for g in circuit.gates:
        psi = apply_gate(psi, g, n)
    return psi


def empty_state(n: int) -> np.ndarray:
    """Product of ``|<-|`` on every qubit: the fermion vacuum."""
    psi = np.ones(1)
    for _ in range(n):
        psi = np.kron(psi, _MINUS)
    return psi.astype(complex)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.width
    if n > 12:
        raise TooManyQubits("dense circuit unitaries are limited to 12 qubits")
    return statevector_simulate(circuit, np.eye(2**n, dtype=complex))


def circuit_mode_unitary(circuit: Circuit) -> np.ndarray:
    """Composite mode matrix of a circuit of number-conserving gates."""
    u = np.eye(circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        v = mode_matrix(g)
        if v is None:
            raise ValueError(f"gate {g.name} is not number conserving")
        full = np.eye(circuit.n_qubits, dtype=complex)
        q = list(g.qubits)
        full[np.ix_(q, q)] = v
        u = full @ u
    return u


# ---------------------------------------------------------------------------
# Jordan-Wigner decomposition

_PROD = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}  # fmt: skip


def _mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for sa, wa in a.items():
        for sb, wb in b.items():
            ph = 1.0 + 0j
            letters = []
            for x, y in zip(sa, sb):
                p, z = _PROD[(x, y)]
                ph *= p
                letters.append(z)
            key = "".join(letters)
            out[key] = out.get(key, 0) + wa * wb * ph
    return out


def _mode(m: int, j: int, dagger: bool) -> dict:
    pre = "X" * j
    post = "I" * (m - j - 1)
    s = -1 if dagger else 1
    return {pre + "Z" + post: 0.5, pre + "Y" + post: 0.5j * s}


def jordan_wigner(op: QuadraticOperator, tol: float = 1e-14) -> list[tuple[complex, str]]:
    """Weighted Pauli strings whose sum equals ``op`` on the qubit register."""
    m = op.n_modes
    ann = [_mode(m, j, False) for j in range(m)]
    cre = [_mode(m, j, True) for j in range(m)]
    total: dict = {"I" * m: complex(op.offset)}

    def acc(w, d):
        for k, v in d.items():
            total[k] = total.get(k, 0) + w * v

    for p, q in zip(*np.nonzero(np.abs(op.A) > tol)):
        acc(op.A[p, q], _mul(cre[p], ann[q]))
    for p, q in zip(*np.nonzero(np.abs(op.B) > tol)):
        acc(0.5 * op.B[p, q], _mul(cre[p], cre[q]))
    for p, q in zip(*np.nonzero(np.abs(op.C) > tol)):
        acc(0.5 * op.C[p, q], _mul(ann[p], ann[q]))
    scale = max(1.0, max(abs(v) for v in total.values()))
    return sorted(((w, s) for s, w in total.items() if abs(w) > tol * scale), key=lambda t: t[1])


def pauli_sum_matrix(terms, n: int) -> np.ndarray:
    from .fock import pauli_string

    out = np.zeros((2**n, 2**n), dtype=complex)
    for w, s in terms:
        out += w * pauli_string(s).toarray()
    return out


# ---------------------------------------------------------------------------
# ground-state preparation


def pair_slots(spec: LatticeSpec) -> list[int]:
    """Momentum index held by each qubit of the momentum register; ``l`` next to ``-l``."""
    neg = spec.negated_index()
    order: list[int] = []
    seen = set()
    for i in range(spec.n_modes):
        if i in seen:
            continue
        order.append(i)
        seen.add(i)
        if neg[i] != i:
            order.append(int(neg[i]))
            seen.add(int(neg[i]))
    return order


def _permutation_network(circ: Circuit, perm: list[int]) -> None:
    """Adjacent fswaps moving the mode at position ``perm[t]`` to position ``t``."""
    cur = list(range(len(perm)))  # cur[pos] = original position of the mode now at pos
    target = list(perm)
    for t in range(len(target)):
        pos = cur.index(target[t])
        while pos > t:
            circ.add("fswap", (pos - 1, pos))
            cur[pos - 1], cur[pos] = cur[pos], cur[pos - 1]
            pos -= 1


def _inverse_dft(circ: Circuit, qubits: list[int]) -> None:
    """Radix-2 network applying the unitary inverse DFT to the modes on ``qubits``."""
    m = len(qubits)
    if m == 1:
        return
    if m & (m - 1):
        raise ValueError("fermionic FFT needs a power-of-two number of modes")
    h = m // 2
    # even-odd shuffle
    local = list(range(0, m, 2)) + list(range(1, m, 2))
    sub = Circuit(circ.n_qubits, [], circ.n_ancillas)
    _permutation_network(sub, local)
    for g in sub.gates:
        circ.add(g.name, tuple(qubits[q] for q in g.qubits), *g.params)
    _inverse_dft(circ, qubits[:h])
    _inverse_dft(circ, qubits[h:])
    # twiddles on the odd half
    for k in range(1, h):
        circ.add("phase", (qubits[h + k],), 2 * np.pi * k / m)
    # interleave E_k next to O_k
    inter = [x for k in range(h) for x in (k, h + k)]
    sub = Circuit(circ.n_qubits, [], circ.n_ancillas)
    _permutation_network(sub, inter)
    for g in sub.gates:
        circ.add(g.name, tuple(qubits[q] for q in g.qubits), *g.params)
    for k in range(h):
        circ.add("fourier", (qubits[2 * k], qubits[2 * k + 1]))
    # outputs sit as y_k, y_{k+h} pairs; restore natural order
    back = [2 * k for k in range(h)] + [2 * k + 1 for k in range(h)]
    sub = Circuit(circ.n_qubits, [], circ.n_ancillas)
    _permutation_network(sub, back)
    for g in sub.gates:
        circ.add(g.name, tuple(qubits[q] for q in g.qubits), *g.params)


def fourier_circuit(spec: LatticeSpec) -> Circuit:
    """Fermionic Fourier transform from the momentum register to site modes.

    Its mode matrix is ``F^H`` with the rows of ``F`` ordered as in
    :func:`pair_slots`, so register mode ``r`` becomes the momentum mode it
    labels.
    """
    m = spec.n_modes
    slots = pair_slots(spec)
    sigma = 0.5 if spec.sector == "NS" else 0.0
    q = np.rint(spec.momentum_grid * spec.L / np.pi - sigma).astype(int)
    circ = Circuit(m)
    # phases exp(-i pi (q + sigma)) on register modes
    for r, i in enumerate(slots):
        circ.add("phase", (r,), -np.pi * (q[i] + sigma))
    # register order -> DFT row order (q mod m)
    rows = [int(np.mod(q[i], m)) for i in slots]
    perm = [rows.index(r) for r in range(m)]
    _permutation_network(circ, perm)
    _inverse_dft(circ, list(range(m)))
    for j in range(m):
        ang = 2 * np.pi * sigma * j / m
        if ang:
            circ.add("phase", (j,), ang)
    return circ


def bogoliubov_angles(spec: LatticeSpec) -> list[tuple[int, int, float, float]]:
    """``(qubit, qubit+1, theta, phi)`` for each momentum pair of the register."""
    sd = diagonalize(spec)
    slots = pair_slots(spec)
    out = []
    r = 0
    while r < len(slots):
        i = slots[r]
        if r + 1 < len(slots) and slots[r + 1] == spec.negated_index()[i] and slots[r + 1] != i:
            u, v = sd.u[i], sd.v[i]
            theta = float(np.arctan2(abs(v), abs(u)))
            phi = float(np.angle(-v / u)) if abs(u) > 0 else float(np.angle(-v))
            out.append((r, r + 1, theta, phi))
            r += 2
        else:
            r += 1
    return out


def ground_state_prep_circuit(spec: LatticeSpec, parity: int | None = None) -> Circuit:
    """Bogoliubov layer on momentum pairs followed by the fermionic Fourier transform.

    Raises
    ------
    DegenerateGroundState
        For zero modes without an explicit parity.
    """
    sd = diagonalize(spec)
    m = spec.n_modes
    slots = pair_slots(spec)
    circ = Circuit(m)
    if sd.has_zero_mode:
        if parity is None:
            raise DegenerateGroundState("zero mode present; choose a parity sector")
    neg = spec.negated_index()
    filled = [r for r, i in enumerate(slots) if neg[i] == i and abs(sd.v[i]) > 0.5]
    if sd.has_zero_mode and parity is not None:
        base = (-1) ** len(filled)
        if base != parity:
            zr = [r for r, i in enumerate(slots) if i in set(sd.zero_modes.tolist())]
            z0 = min(zr, key=lambda r: abs(spec.momentum_grid[slots[r]]))
            filled = sorted(set(filled) ^ {z0})
    for r in filled:
        # a_r + a+_r = X...X Z_r fills an empty mode
        circ.add("pauli", tuple(range(r + 1)), "X" * r + "Z")
    for q0, q1, theta, phi in bogoliubov_angles(spec):
        circ.add("bogoliubov", (q0, q1), theta, phi)
    circ.extend(fourier_circuit(spec))
    return circ


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real))


def exact_ground_vector(spec: LatticeSpec) -> np.ndarray:
    from .lattice import build_staggered_hamiltonian

    H = to_fock(build_staggered_hamiltonian(spec)).toarray()
    w, V = np.linalg.eigh(H)
    if w[1] - w[0] < 1e-9:
        raise DegenerateGroundState("dense ground state is degenerate")
    return V[:, 0]


def fermion_parity(psi: np.ndarray, n: int) -> float:
    P = parity_operator(n)
    return float(np.real(np.vdot(psi, P @ psi)))


# ---------------------------------------------------------------------------
# field-operator gadget


def field_operator_gadget(spec: LatticeSpec, k: float, j: int) -> Circuit:
    """Ancilla circuit whose ``|+>``-postselected action is a momentum mode operator.

    ``j = 1`` gives the annihilator of the normalized momentum mode ``k`` and
    ``j = 2`` its adjoint.  The ancilla is the last qubit and starts in
    ``|0>``; the circuit prepares ``|+>`` itself.
    """
    if j not in (1, 2):
        raise ValueError("j selects the annihilator (1) or creator (2)")
    m = spec.n_modes
    slots = pair_slots(spec)
    i = int(spec.momentum_index(k))
    r = slots.index(i)
    U = fourier_circuit(spec)
    circ = Circuit(m, [], 1)
    anc = m
    circ.add("hadamard", (anc,))
    for g in U.inverse().gates:
        circ.gates.append(g)
    sysq = tuple(range(r + 1))
    s0 = "X" * r + "Z"
    s1 = "X" * r + "Y"
    circ.add("branch", (anc,) + sysq, s0, 1.0, s1, -((-1) ** j) * 1j)
    circ.gates.extend(U.gates)
    circ.add("hadamard", (anc,))
    return circ


def postselect_ancilla(psi: np.ndarray, n_system: int, outcome: int = 0) -> tuple[np.ndarray, float]:
    """Project the last qubit on ``outcome`` (computational basis); returns state and probability."""
    t = psi.reshape(2**n_system, 2)[:, outcome]
    p = float(np.vdot(t, t).real)
    return t, p


def apply_gadget(spec: LatticeSpec, psi_sys: np.ndarray, k: float, j: int) -> tuple[np.ndarray, float]:
    """Run the gadget on a system state; returns the postselected (unnormalized) state and probability.

    The closing Hadamard maps ``|+>`` to ``|0>``, so postselection keeps ancilla ``0``.
    The returned vector already carries the postselection amplitude, so it
    equals the mode operator applied to ``psi_sys``.
    """
    circ = field_operator_gadget(spec, k, j)
    full = np.kron(psi_sys, np.array([1.0, 0.0]))
    out = statevector_simulate(circ, full)
    t, p = postselect_ancilla(out, spec.n_modes, 0)
    return t, p


def momentum_mode_field(spec: LatticeSpec, k: float, j: int):
    """The same mode operator as a :class:`~latcft.gaussian.FermionField`."""
    from .gaussian import FermionField

    F = fourier_matrix(spec)
    row = F[int(spec.momentum_index(k))]
    field_ = FermionField.from_modes(row)
    return field_ if j == 1 else field_.adjoint()


# ---------------------------------------------------------------------------
# Trotterization


def trotterize(generator: QuadraticOperator, t: float, steps: int, order: int = 2) -> Circuit:
    """Product formula for ``exp(-i t G)`` over the Pauli terms of ``G``.

    Order 1 applies the terms in sequence; order 2 is the symmetric
    (Strang) splitting.
    """
    from .errors import NonHermitianGenerator, UnsupportedOrder

    if order not in (1, 2):
        raise UnsupportedOrder(f"Trotter order {order} not supported")
    if steps < 1:
        raise ValueError("steps must be positive")
    if not generator.is_hermitian(1e-9):
        raise NonHermitianGenerator("Trotterized generators must be Hermitian")
    m = generator.n_modes
    circ = Circuit(m)
    if t == 0:
        return circ
    terms = jordan_wigner(generator)
    ident = "I" * m
    phase = sum(np.real(w) for w, s in terms if s == ident)
    terms = [(float(np.real(w)), s) for w, s in terms if s != ident]
    dt = t / steps

    def layer(scale, seq):
        for w, s in seq:
            q = tuple(i for i, c in enumerate(s) if c != "I")
            circ.add("pauli_rotation", q, w * dt * scale, "".join(c for c in s if c != "I"))

    for _ in range(steps):
        if order == 1:
            layer(1.0, terms)
        else:
            layer(0.5, terms)
            layer(0.5, terms[::-1])
    if phase:
        circ.add("global_phase", (), -phase * t)
    return circ


def trotter_error(generator: QuadraticOperator, t: float, steps: int, order: int = 2) -> float:
    """Operator-norm distance between the product formula and the exact propagator."""
    one = trotterize(generator, t / steps, 1, order)
    U = np.linalg.matrix_power(circuit_unitary(one), steps)
    H = to_fock(generator).toarray()
    V = sla.expm(-1j * t * H)
    return float(np.linalg.norm(U - V, 2))


@dataclass(frozen=True)
class TrotterFit:
    order: float
    constant: float
    steps: tuple
    errors: tuple

    def bound(self, steps: int) -> float:
        """Envelope ``max_i err_i (steps_i / steps)^order`` over the scan."""
        return float(max(e * (s / steps) ** self.order for s, e in zip(self.steps, self.errors)))


def fit_trotter(generator: QuadraticOperator, t: float, steps=(4, 8, 16, 32, 64), order: int = 2) -> TrotterFit:
    errs = [trotter_error(generator, t, s, order) for s in steps]
    slope, inter = np.polyfit(np.log(steps), np.log(errs), 1)
    return TrotterFit(float(-slope), float(np.exp(inter)), tuple(steps), tuple(errs))


def pipeline_correlator(
    spec: LatticeSpec,
    generator: QuadraticOperator,
    observable: QuadraticOperator,
    k_mode: float,
    t: float,
    steps: int = 64,
    order: int = 2,
    j: int = 1,
) -> dict:
    """Prepare, apply a field mode, Trotter-evolve and measure, on the statevector.

    Returns the normalized statevector value, the exact Gaussian value of
    ``<psi+ exp(itG) O exp(-itG) psi> / <psi+ psi>`` and the gadget success
    probability.
    """
    from .gaussian import conformal_correlator, expectation
    from .lattice import ground_state

    m = spec.n_modes
    psi0 = statevector_simulate(ground_state_prep_circuit(spec))
    phi, prob = apply_gadget(spec, psi0, k_mode, j)
    phi_t = statevector_simulate(trotterize(generator, t, steps, order), phi)
    O = to_fock(observable).toarray()
    sv = np.vdot(phi_t, O @ phi_t) / np.vdot(phi_t, phi_t)
    state = ground_state(spec)
    f = momentum_mode_field(spec, k_mode, j)
    norm = expectation(state, [f.adjoint(), f])
    exact = conformal_correlator(state, [f.adjoint()], [observable], generator, t, tail=[f]) / norm
    return {"statevector": complex(sv), "gaussian": complex(exact), "probability": prob, "norm": complex(norm), "qubits": m}


# ---------------------------------------------------------------------------
# phase estimation


@dataclass
class PhaseEstimationPlan:
    circuit: Circuit
    r: int
    shift: float
    width: float

    def value(self, y: int) -> float:
        """Observable value decoded from outcome ``y``, centred on the window."""
        ph = y / 2**self.r
        if ph >= 0.5:
            ph -= 1.0
        return self.shift + self.width * ph

    @property
    def resolution(self) -> float:
        return self.width / 2**self.r


def phase_estimation_plan(observable: QuadraticOperator, r: int, center: float | None = None, width: float | None = None) -> PhaseEstimationPlan:
    """Textbook phase estimation of ``exp(2 pi i (O - center) / width)`` with ``r`` ancillas.

    Raises
    ------
    NonHermitianObservable
        If ``observable`` is not Hermitian.
    """
    if not observable.is_hermitian(1e-9):
        raise NonHermitianObservable("phase estimation needs a Hermitian observable")
    m = observable.n_modes
    H = to_fock(observable).toarray()
    if center is None or width is None:
        # norm bound from the Pauli weights, without diagonalizing
        bound = sum(abs(w) for w, _ in jordan_wigner(observable))
        center = 0.0 if center is None else center
        width = 2.2 * (bound + abs(center)) if width is None else width
    circ = Circuit(m, [], r)
    anc = list(range(m, m + r))
    for a in anc:
        circ.add("hadamard", (a,))
    U = sla.expm(2j * np.pi * (H - center * np.eye(len(H))) / width)
    for b, a in enumerate(anc):
        # ancilla b controls U^(2^(r-1-b)), most significant first
        Up = np.linalg.matrix_power(U, 2 ** (r - 1 - b))
        d = len(H)
        CU = np.block([[np.eye(d), np.zeros((d, d))], [np.zeros((d, d)), Up]])
        circ.add("controlled_unitary", (a,) + tuple(range(m)), CU)
    # inverse QFT on the ancillas
    R = 2**r
    w = np.exp(-2j * np.pi / R)
    iqft = np.array([[w ** (x * y) for y in range(R)] for x in range(R)]) / np.sqrt(R)
    circ.add("unitary", tuple(anc), iqft)
    return PhaseEstimationPlan(circ, r, center, width)


def phase_estimation_readout(plan: PhaseEstimationPlan, psi_sys: np.ndarray) -> tuple[np.ndarray, float]:
    """Outcome histogram of the ancilla register and its decoded mean."""
    m, r = plan.circuit.n_qubits, plan.r
    full = np.kron(psi_sys, np.eye(2**r)[0])
    out = statevector_simulate(plan.circuit, full)
    probs = (np.abs(out.reshape(2**m, 2**r)) ** 2).sum(axis=0)
    mean = float(sum(p * plan.value(y) for y, p in enumerate(probs)))
    return probs, mean
