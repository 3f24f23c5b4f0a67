"""Component-level benchmarks: per-qubit gates, readout, crosstalk, coherence.

Each experiment builds device-width circuits acting on its target qubit, so
the same generator drives the local simulator and remote backends alike.
Measured fractions come from the target qubit's bit of the full register.

Protocols:

* randomized benchmarking: random Clifford sequences of several lengths,
  each closed by the group inverse, fitted to A*alpha^N + B on the fraction
  of |1> outcomes; error per Clifford r = (1 - alpha)/2 converts to a
  per-gate fidelity through the table's mean pulse count.
* readout: prepare all-zeros and all-ones, estimate each qubit's confusion
  matrix; the fidelity is 1 - (M01 + M10)/2.
* crosstalk: prepare every joint basis state and compare the full
  assignment matrix against the tensor product of per-qubit matrices.
* coherence: relaxation (X - wait - measure), free induction with an
  artificial detuning applied as a wait-dependent frame rotation, and a
  single-refocusing-pulse echo.  The simulator has no low-frequency noise,
  so echo times land near the free-induction times by construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import cliffords
from .backends import Backend, submit_and_wait
from .circuits import Circuit, Gate, measure_all, rz, wait, x, x90
from .fitting import DataSeries, FitResult, fit_damped_sinusoid, fit_exp_decay, fit_geometric
from .simulator import index_to_bitstring


@dataclass(frozen=True)
class RBConfig:
    lengths: tuple[int, ...] = (1, 20, 40, 80, 120)
    sequences_per_length: int = 10
    shots: int = 4096
    seed: int = 0


@dataclass(frozen=True)
class CoherenceConfig:
    n_waits: int = 32
    max_wait_us: float = 60.0
    detuning_mhz: float = 0.125
    shots: int = 4096
    seed: int = 0

    def waits_us(self) -> np.ndarray:
        return np.linspace(0.0, self.max_wait_us, self.n_waits)


T1_MAX_WAIT_US = 60.0
T2STAR_MAX_WAIT_US = 24.0
T2HAHN_MAX_WAIT_US = 120.0


# --- randomized benchmarking --------------------------------------------------

def gen_rb_sequences(cfg: RBConfig, qubit: int, n_qubits: int) -> list[Circuit]:
    """Random Clifford sequences with their closing inverse, one per (length, rep)."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, qubit, 0x5B]))
    circuits = []
    for n_cliff in cfg.lengths:
        for rep in range(cfg.sequences_per_length):
            indices = rng.integers(0, cliffords.N_CLIFFORDS, size=n_cliff)
            inv = cliffords.INVERSE_TABLE[cliffords.compose_indices(list(indices))]
            ops: list[Gate] = []
            for idx in itertools.chain(indices, (inv,)):
                ops.extend(cliffords.ELEMENTS[int(idx)].to_ops(qubit))
            ops.append(measure_all())
            circuits.append(
                Circuit(n_qubits, tuple(ops), label=f"rb_q{qubit}_N{n_cliff}_s{rep}")
            )
    return circuits


@dataclass(frozen=True)
class RBResult:
    qubit: int
    lengths: tuple[int, ...]
    incorrect_fractions: tuple[float, ...]
    fit: FitResult
    epc: float
    f1q: float
    valid: bool


def epc_from_alpha(alpha: float) -> float:
    """Error per Clifford from the geometric decay constant."""
    return 0.5 * (1.0 - alpha)


def f1q_from_epc(epc: float) -> float:
    """Average native-gate fidelity from the per-Clifford error."""
    return (1.0 - epc) ** (1.0 / cliffords.AVG_PULSES_PER_CLIFFORD)


def run_rb(backend: Backend, cfg: RBConfig, qubit: int) -> RBResult:
    circuits = gen_rb_sequences(cfg, qubit, backend.n_qubits)
    tables = submit_and_wait(backend, circuits, cfg.shots, cfg.seed)
    per_length: dict[int, list[float]] = {n: [] for n in cfg.lengths}
    i = 0
    for n_cliff in cfg.lengths:
        for _ in range(cfg.sequences_per_length):
            per_length[n_cliff].append(tables[i].fraction_ones(qubit))
            i += 1
    fractions = tuple(float(np.mean(per_length[n])) for n in cfg.lengths)
    series = DataSeries(
        np.array(cfg.lengths, dtype=float),
        np.array(fractions),
        shots_per_point=cfg.shots * cfg.sequences_per_length,
    )
    fit = fit_geometric(series)
    alpha = fit.value("alpha")
    epc = epc_from_alpha(alpha)
    return RBResult(
        qubit=qubit,
        lengths=cfg.lengths,
        incorrect_fractions=fractions,
        fit=fit,
        epc=epc,
        f1q=f1q_from_epc(epc),
        valid=fit.converged and not fit.unidentifiable,
    )


# --- readout and crosstalk ----------------------------------------------------

@dataclass(frozen=True)
class ReadoutAssignment:
    """Per-qubit confusion matrices, and optionally the joint matrix."""

    per_qubit: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    shots: int
    full_matrix: np.ndarray | None = None

    def fidelity(self, qubit: int) -> float:
        m = self.per_qubit[qubit]
        return readout_fidelity_from_matrix(m)


def readout_fidelity_from_matrix(m) -> float:
    """F = 1 - (M10 + M01)/2 for a 2x2 assignment matrix."""
    return 1.0 - (m[1][0] + m[0][1]) / 2.0


def _basis_prep_circuit(n_qubits: int, bits: int) -> Circuit:
    ops = [x(q) for q in range(n_qubits) if (bits >> (n_qubits - 1 - q)) & 1]
    ops.append(measure_all())
    return Circuit(n_qubits, tuple(ops), label=f"prep_{index_to_bitstring(bits, n_qubits)}")


def measure_readout(backend: Backend, shots: int = 4096, seed: int = 0) -> ReadoutAssignment:
    """Estimate per-qubit assignment matrices from all-zeros and all-ones preps."""
    n = backend.n_qubits
    zeros = _basis_prep_circuit(n, 0)
    ones = _basis_prep_circuit(n, 2**n - 1)
    t0, t1 = submit_and_wait(backend, [zeros, ones], shots, seed)
    per_qubit = []
    for q in range(n):
        m01 = t0.fraction_ones(q)
        m10 = 1.0 - t1.fraction_ones(q)
        per_qubit.append(((1.0 - m01, m01), (m10, 1.0 - m10)))
    return ReadoutAssignment(per_qubit=tuple(per_qubit), shots=shots)


@dataclass(frozen=True)
class CrosstalkResult:
    matrix: np.ndarray  # empirical joint assignment, rows = prepared states
    tensor_prediction: np.ndarray
    max_row_l1: float
    max_row_offdiag: float
    shots: int

    @property
    def summary(self) -> float:
        return self.max_row_l1


def measure_crosstalk(backend: Backend, shots: int = 16384, seed: int = 0) -> CrosstalkResult:
    """Full-register assignment matrix from every joint basis-state preparation.

    The independent-readout prediction is the tensor product of per-qubit
    matrices estimated from the same data's marginals; the summary scalar is
    the worst row's L1 distance from that prediction.
    """
    n = backend.n_qubits
    if n > 6:
        raise ValueError("crosstalk measurement is capped at 6 qubits (2^n preparations)")
    dim = 2**n
    circuits = [_basis_prep_circuit(n, b) for b in range(dim)]
    tables = submit_and_wait(backend, circuits, shots, seed)

    matrix = np.zeros((dim, dim))
    for b, t in enumerate(tables):
        for key, c in t.counts.items():
            matrix[b, int(key, 2)] = c / shots

    # per-qubit matrices from marginals over every preparation
    per_qubit = np.zeros((n, 2, 2))
    for b, t in enumerate(tables):
        for q in range(n):
            prepared = (b >> (n - 1 - q)) & 1
            ones = t.fraction_ones(q)
            per_qubit[q, prepared, 1] += ones
            per_qubit[q, prepared, 0] += 1.0 - ones
    per_qubit /= dim / 2  # each prepared value occurs in half the preparations

    prediction = np.zeros((dim, dim))
    for b in range(dim):
        row = np.array([1.0])
        for q in range(n):
            prepared = (b >> (n - 1 - q)) & 1
            row = np.kron(row, per_qubit[q, prepared])
        prediction[b] = row

    l1 = np.abs(matrix - prediction).sum(axis=1)
    offdiag = matrix.sum(axis=1) - np.diag(matrix)
    return CrosstalkResult(
        matrix=matrix,
        tensor_prediction=prediction,
        max_row_l1=float(l1.max()),
        max_row_offdiag=float(offdiag.max()),
        shots=shots,
    )


# --- coherence times ------------------------------------------------------------

@dataclass(frozen=True)
class CoherenceResult:
    qubit: int
    kind: str
    waits_us: tuple[float, ...]
    fractions: tuple[float, ...]
    fit: FitResult
    time_us: float
    valid: bool


def _run_wait_scan(
    backend: Backend,
    circuits: list[Circuit],
    qubit: int,
    shots: int,
    seed: int,
) -> list[float]:
    tables = submit_and_wait(backend, circuits, shots, seed)
    return [t.fraction_ones(qubit) for t in tables]


def t1_experiment(backend: Backend, qubit: int, cfg: CoherenceConfig | None = None) -> CoherenceResult:
    """Relaxation: excite, idle for a scanned duration, measure."""
    cfg = cfg or CoherenceConfig(max_wait_us=T1_MAX_WAIT_US)
    waits = cfg.waits_us()
    n = backend.n_qubits
    circuits = [
        Circuit(
            n,
            (x(qubit), wait(qubit, t * 1000.0), measure_all()),
            label=f"t1_q{qubit}_{i}",
        )
        for i, t in enumerate(waits)
    ]
    y = _run_wait_scan(backend, circuits, qubit, cfg.shots, cfg.seed)
    fit = fit_exp_decay(DataSeries(waits, np.array(y), shots_per_point=cfg.shots))
    return CoherenceResult(
        qubit=qubit,
        kind="t1",
        waits_us=tuple(map(float, waits)),
        fractions=tuple(y),
        fit=fit,
        time_us=fit.value("T"),
        valid=fit.converged and not fit.unidentifiable,
    )


def t2star_experiment(
    backend: Backend, qubit: int, cfg: CoherenceConfig | None = None
) -> CoherenceResult:
    """Free-induction dephasing with an artificial detuning.

    The detuning enters as a frame rotation of 2*pi*f*t after each wait so
    the fitted oscillation frequency is known, which keeps slow dephasing
    from masquerading as a frequency mismatch.
    """
    cfg = cfg or CoherenceConfig(max_wait_us=T2STAR_MAX_WAIT_US)
    waits = cfg.waits_us()
    omega = 2 * np.pi * cfg.detuning_mhz  # rad per microsecond
    n = backend.n_qubits
    circuits = [
        Circuit(
            n,
            (
                x90(qubit),
                wait(qubit, t * 1000.0),
                rz(qubit, float(omega * t) % (2 * np.pi)),
                x90(qubit),
                measure_all(),
            ),
            label=f"t2star_q{qubit}_{i}",
        )
        for i, t in enumerate(waits)
    ]
    y = _run_wait_scan(backend, circuits, qubit, cfg.shots, cfg.seed)
    series = DataSeries(waits, np.array(y), shots_per_point=cfg.shots)
    try:
        fit = fit_damped_sinusoid(series, omega_guess=omega)
    except ValueError:
        # zero or too-small detuning: decay and frequency are confounded
        fit = FitResult({}, {}, float("nan"), False, 0, ("unidentifiable",))
    time_us = fit.params.get("T", float("nan"))
    return CoherenceResult(
        qubit=qubit,
        kind="t2star",
        waits_us=tuple(map(float, waits)),
        fractions=tuple(y),
        fit=fit,
        time_us=time_us,
        valid=fit.converged and not fit.unidentifiable,
    )


def t2hahn_experiment(
    backend: Backend, qubit: int, cfg: CoherenceConfig | None = None
) -> CoherenceResult:
    """Echo: half the wait, one refocusing pulse, the other half."""
    cfg = cfg or CoherenceConfig(max_wait_us=T2HAHN_MAX_WAIT_US)
    waits = cfg.waits_us()
    n = backend.n_qubits
    circuits = [
        Circuit(
            n,
            (
                x90(qubit),
                wait(qubit, t * 500.0),
                x(qubit),
                wait(qubit, t * 500.0),
                x90(qubit),
                measure_all(),
            ),
            label=f"t2hahn_q{qubit}_{i}",
        )
        for i, t in enumerate(waits)
    ]
    y = _run_wait_scan(backend, circuits, qubit, cfg.shots, cfg.seed)
    fit = fit_exp_decay(DataSeries(waits, np.array(y), shots_per_point=cfg.shots))
    return CoherenceResult(
        qubit=qubit,
        kind="t2hahn",
        waits_us=tuple(map(float, waits)),
        fractions=tuple(y),
        fit=fit,
        time_us=fit.value("T"),
        valid=fit.converged and not fit.unidentifiable,
    )


def q_factor(t2stars_us: list[float], gate_ns: float) -> float:
    """Mean dephasing time over the single-qubit gate duration."""
    if not t2stars_us:
        raise ValueError("need at least one dephasing time")
    if gate_ns <= 0:
        raise ValueError("gate duration must be positive")
    return float(np.mean(t2stars_us) / (gate_ns / 1000.0))


# --- full calibration ------------------------------------------------------------

@dataclass
class CalibrationSummary:
    rb: list[RBResult]
    readout: ReadoutAssignment
    crosstalk: CrosstalkResult
    t1: list[CoherenceResult]
    t2star: list[CoherenceResult]
    t2hahn: list[CoherenceResult]
    q_factor: float


def run_calibration(
    backend: Backend,
    seed: int = 0,
    rb_cfg: RBConfig | None = None,
    shots: int = 4096,
    include_crosstalk: bool = True,
) -> CalibrationSummary:
    """Every component metric for every qubit, at the standard settings."""
    n = backend.n_qubits
    rb_results = []
    t1s, t2stars, t2hahns = [], [], []
    for q in range(n):
        rb_results.append(
            run_rb(backend, rb_cfg or RBConfig(shots=shots, seed=seed), q)
        )
        t1s.append(
            t1_experiment(backend, q, CoherenceConfig(max_wait_us=T1_MAX_WAIT_US, shots=shots, seed=seed))
        )
        t2stars.append(
            t2star_experiment(backend, q, CoherenceConfig(max_wait_us=T2STAR_MAX_WAIT_US, shots=shots, seed=seed))
        )
        t2hahns.append(
            t2hahn_experiment(backend, q, CoherenceConfig(max_wait_us=T2HAHN_MAX_WAIT_US, shots=shots, seed=seed))
        )
    readout = measure_readout(backend, shots=shots, seed=seed)
    if include_crosstalk:
        crosstalk = measure_crosstalk(backend, shots=16384, seed=seed)
    else:
        crosstalk = None
    valid_t2 = [r.time_us for r in t2stars if r.valid]
    qf = q_factor(valid_t2, 20.0) if valid_t2 else float("nan")
    return CalibrationSummary(
        rb=rb_results,
        readout=readout,
        crosstalk=crosstalk,
        t1=t1s,
        t2star=t2stars,
        t2hahn=t2hahns,
        q_factor=qf,
    )
