"""Ideal and noisy circuit simulators.

The ideal path evolves a pure state and returns exact Born probabilities;
it is the classical oracle used for heavy-output sets and fidelity
references.  The noisy path evolves a density matrix: every physical gate
applies its unitary followed by a depolarizing channel, idle decay
(amplitude damping to the T1 and extra pure dephasing to the T2 of each
qubit) runs for the duration of every scheduling layer on every qubit, and
sampled bits pass through per-qubit readout confusion with an optional
correlated flip term.

Bit convention everywhere: qubit 0 is the leftmost character of a
bitstring, i.e. the most significant bit of a basis index.

Virtual RZ gates and WAIT are error-free apart from the idle decay WAIT
adds through its duration; measurement samples the final state as-is, since
confusion matrices are calibrated quantities that already contain
measurement-process errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate
from .cliffords import X90_MAT, X_MAT, Y90_MAT
from .device import DeviceModel

IDEAL_QUBIT_CAP = 12

_GATE_1Q = {"X": X_MAT, "X90": X90_MAT, "Y90": Y90_MAT}


# --- pure-state simulation --------------------------------------------------

def _apply_1q_matrix(psi: np.ndarray, m: np.ndarray, q: int) -> np.ndarray:
    out = np.tensordot(m, psi, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def apply_gate_to_state(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply one gate to a pure state stored as a (2,)*n tensor."""
    if gate.kind in _GATE_1Q:
        return _apply_1q_matrix(psi, _GATE_1Q[gate.kind], gate.qubits[0])
    if gate.kind == "RZ":
        q = gate.qubits[0]
        shape = [1] * n
        shape[q] = 2
        phases = np.exp(np.array([-0.5j, 0.5j]) * gate.angle_rad).reshape(shape)
        return psi * phases
    if gate.kind == "CZ":
        a, b = gate.qubits
        psi = psi.copy()
        idx = [slice(None)] * n
        idx[a], idx[b] = 1, 1
        psi[tuple(idx)] *= -1.0
        return psi
    if gate.kind == "WAIT":
        return psi
    raise ValueError(f"cannot apply {gate.kind} to a pure state")


def run_ideal(circuit: Circuit, cap: int = IDEAL_QUBIT_CAP) -> np.ndarray:
    """Exact outcome probabilities of a circuit on the all-zeros input."""
    n = circuit.n_qubits
    if n > cap:
        raise ValueError(f"ideal simulation capped at {cap} qubits, got {n}")
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for g in circuit.body():
        psi = apply_gate_to_state(psi, g, n)
    probs = np.abs(psi.reshape(-1)) ** 2
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError("state norm drifted during ideal simulation")
    return probs / total


def index_to_bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def probabilities_dict(probs: np.ndarray, n: int, threshold: float = 0.0) -> dict[str, float]:
    return {
        index_to_bitstring(i, n): float(p)
        for i, p in enumerate(probs)
        if p > threshold
    }


# --- measurement records -----------------------------------------------------

@dataclass(frozen=True)
class ShotTable:
    """Histogram of measured bitstrings for one executed circuit."""

    counts: dict[str, int]
    shots: int
    seed: int
    n_qubits: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to the shot total")
        for b in self.counts:
            if len(b) != self.n_qubits or set(b) - {"0", "1"}:
                raise ValueError(f"bad bitstring key {b!r}")

    def fraction_ones(self, qubit: int) -> float:
        hits = sum(c for b, c in self.counts.items() if b[qubit] == "1")
        return hits / self.shots

    def frequencies(self) -> np.ndarray:
        out = np.zeros(2**self.n_qubits)
        for b, c in self.counts.items():
            out[int(b, 2)] = c / self.shots
        return out

    def marginal(self, positions: tuple[int, ...]) -> dict[str, int]:
        out: dict[str, int] = {}
        for b, c in self.counts.items():
            key = "".join(b[p] for p in positions)
            out[key] = out.get(key, 0) + c
        return out


def total_variation_distance(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# --- noise channels ----------------------------------------------------------

def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)
    return _checked([k0, k1])


def dephasing_kraus(lam: float) -> list[np.ndarray]:
    """Kraus pair scaling coherences by exactly (1 - lam)."""
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    pz = lam / 2.0
    k0 = math.sqrt(1 - pz) * np.eye(2, dtype=complex)
    k1 = math.sqrt(pz) * np.diag([1.0, -1.0]).astype(complex)
    return _checked([k0, k1])


def _checked(kraus: list[np.ndarray]) -> list[np.ndarray]:
    acc = sum(k.conj().T @ k for k in kraus)
    if np.abs(acc - np.eye(acc.shape[0])).max() > 1e-9:
        raise ValueError("Kraus set is not trace preserving")
    return kraus


# --- density-matrix evolution -------------------------------------------------

class _Density:
    """Density matrix as a (2,)*2n tensor: ket axes first, then bra axes."""

    def __init__(self, n: int) -> None:
        self.n = n
        rho = np.zeros((2,) * (2 * n), dtype=complex)
        rho[(0,) * (2 * n)] = 1.0
        self.rho = rho

    def apply_1q(self, m: np.ndarray, q: int) -> None:
        n = self.n
        rho = np.tensordot(m, self.rho, axes=([1], [q]))
        rho = np.moveaxis(rho, 0, q)
        rho = np.tensordot(m.conj(), rho, axes=([1], [n + q]))
        self.rho = np.moveaxis(rho, 0, n + q)

    def apply_kraus_1q(self, kraus: list[np.ndarray], q: int) -> None:
        n = self.n
        out = None
        for k in kraus:
            rho = np.tensordot(k, self.rho, axes=([1], [q]))
            rho = np.moveaxis(rho, 0, q)
            rho = np.tensordot(k.conj(), rho, axes=([1], [n + q]))
            rho = np.moveaxis(rho, 0, n + q)
            out = rho if out is None else out + rho
        self.rho = out

    def apply_phase_1q(self, phases: np.ndarray, q: int) -> None:
        n = self.n
        shape_ket = [1] * (2 * n)
        shape_ket[q] = 2
        shape_bra = [1] * (2 * n)
        shape_bra[n + q] = 2
        self.rho = self.rho * phases.reshape(shape_ket)
        self.rho = self.rho * phases.conj().reshape(shape_bra)

    def apply_cz(self, a: int, b: int) -> None:
        n = self.n
        sign = np.ones((2, 2))
        sign[1, 1] = -1.0
        shape_ket = [1] * (2 * n)
        shape_ket[a], shape_ket[b] = 2, 2
        shape_bra = [1] * (2 * n)
        shape_bra[n + a], shape_bra[n + b] = 2, 2
        self.rho = self.rho * sign.reshape(shape_ket)
        self.rho = self.rho * sign.reshape(shape_bra)

    def depolarize_1q(self, p: float, q: int) -> None:
        if p <= 0:
            return
        n = self.n
        tr = np.trace(self.rho, axis1=q, axis2=n + q)
        out = (1 - p) * self.rho
        for b in (0, 1):
            idx = [slice(None)] * (2 * n)
            idx[q], idx[n + q] = b, b
            out[tuple(idx)] += (p / 2.0) * tr
        self.rho = out

    def depolarize_2q(self, p: float, a: int, b: int) -> None:
        if p <= 0:
            return
        n = self.n
        tr = np.trace(self.rho, axis1=a, axis2=n + a)
        # axis positions shift after removing the first pair
        b_ket = b - 1 if b > a else b
        b_bra = (n - 1) + b_ket
        tr = np.trace(tr, axis1=b_ket, axis2=b_bra)
        out = (1 - p) * self.rho
        for ba in (0, 1):
            for bb in (0, 1):
                idx = [slice(None)] * (2 * n)
                idx[a], idx[n + a] = ba, ba
                idx[b], idx[n + b] = bb, bb
                out[tuple(idx)] += (p / 4.0) * tr
        self.rho = out

    def check(self) -> None:
        n = self.n
        dim = 2**n
        m = self.rho.reshape(dim, dim)
        if abs(np.trace(m).real - 1.0) > 1e-9 or abs(np.trace(m).imag) > 1e-9:
            raise RuntimeError("density matrix trace drifted")
        if np.abs(m - m.conj().T).max() > 1e-9:
            raise RuntimeError("density matrix lost Hermiticity")

    def diagonal_probs(self) -> np.ndarray:
        dim = 2**self.n
        d = np.real(np.diag(self.rho.reshape(dim, dim)))
        d = np.clip(d, 0.0, None)
        return d / d.sum()


def _phi_time_us(t1_us: float, t2_us: float) -> float:
    """Pure-dephasing time from T1 and T2; inf when T2 saturates 2*T1."""
    inv = 1.0 / t2_us - 1.0 / (2.0 * t1_us) if math.isfinite(t2_us) else 0.0
    if inv <= 1e-15:
        return math.inf
    return 1.0 / inv


def _idle_kraus(t1_us: float, t2_us: float, dt_ns: float) -> list[list[np.ndarray]]:
    dt_us = dt_ns / 1000.0
    out = []
    gamma = 0.0 if not math.isfinite(t1_us) else 1.0 - math.exp(-dt_us / t1_us)
    if gamma > 0:
        out.append(amplitude_damping_kraus(gamma))
    tphi = _phi_time_us(t1_us, t2_us)
    lam = 0.0 if not math.isfinite(tphi) else 1.0 - math.exp(-dt_us / tphi)
    if lam > 0:
        out.append(dephasing_kraus(lam))
    return out


def run_noisy(
    circuit: Circuit,
    device: DeviceModel,
    shots: int,
    seed: int | np.random.Generator,
) -> ShotTable:
    """Execute a circuit on the simulated device and sample measured bits.

    Deterministic given the seed.  Only qubits touched by gates are evolved;
    untouched qubits sit in the ground state, which is a fixed point of every
    idle channel, so their bits are drawn straight from the confusion matrix.
    """
    n = circuit.n_qubits
    if n > device.n_qubits:
        raise ValueError(
            f"circuit needs {n} qubits but the device has {device.n_qubits}"
        )
    for g in circuit.ops:
        if g.kind == "CZ" and not device.is_connected(*g.qubits):
            raise ValueError(f"CZ on unconnected pair {g.qubits}")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    seed_val = -1 if isinstance(seed, np.random.Generator) else int(seed)

    active = sorted({q for g in circuit.ops for q in g.qubits})
    pos = {q: i for i, q in enumerate(active)}
    k = len(active)

    bits = np.zeros((shots, n), dtype=np.uint8)
    if k > 0:
        state = _Density(k)
        idle_cache: dict[tuple[int, float], list[list[np.ndarray]]] = {}
        for layer in circuit.layers():
            if layer[0].kind == "MEASURE_ALL":
                continue
            duration = max(device.timing.gate_duration_ns(g) for g in layer)
            for g in layer:
                if g.kind in _GATE_1Q:
                    q = pos[g.qubits[0]]
                    state.apply_1q(_GATE_1Q[g.kind], q)
                    state.depolarize_1q(device.p1[g.qubits[0]], q)
                elif g.kind == "RZ":
                    q = pos[g.qubits[0]]
                    state.apply_phase_1q(
                        np.exp(np.array([-0.5j, 0.5j]) * g.angle_rad), q
                    )
                elif g.kind == "CZ":
                    a, b = g.qubits
                    state.apply_cz(pos[a], pos[b])
                    state.depolarize_2q(device.p2, pos[a], pos[b])
            if duration > 0:
                for q_phys in active:
                    key = (q_phys, duration)
                    if key not in idle_cache:
                        qp = device.qubits[q_phys]
                        idle_cache[key] = _idle_kraus(qp.t1_us, qp.t2_us, duration)
                    for kraus in idle_cache[key]:
                        state.apply_kraus_1q(kraus, pos[q_phys])
        state.check()
        probs = state.diagonal_probs()
        outcomes = rng.choice(2**k, size=shots, p=probs)
        for i, q_phys in enumerate(active):
            bits[:, q_phys] = (outcomes >> (k - 1 - i)) & 1

    # per-qubit readout confusion
    for q in range(n):
        m = device.qubits[q].readout
        p_flip = np.where(bits[:, q] == 1, m[1][0], m[0][1])
        flips = rng.random(shots) < p_flip
        bits[:, q] ^= flips.astype(np.uint8)

    # optional correlated readout flips along device edges
    eps = device.correlated_readout_epsilon
    if eps > 0 and device.edges:
        for a, b in device.edges:
            if a < n and b < n:
                mask = rng.random(shots) < eps
                bits[:, a] ^= mask.astype(np.uint8)
                bits[:, b] ^= mask.astype(np.uint8)

    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    ints = bits.astype(np.int64) @ weights
    values, counts = np.unique(ints, return_counts=True)
    table = {
        index_to_bitstring(int(v), n): int(c) for v, c in zip(values, counts)
    }
    return ShotTable(counts=table, shots=shots, seed=seed_val, n_qubits=n)
