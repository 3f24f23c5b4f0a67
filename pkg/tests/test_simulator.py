"""Analytic checks for both simulators and the noise channels."""
import math

import numpy as np
import pytest

from qbench.circuits import Circuit, cz, measure_all, wait, x, x90, y90
from qbench.device import DeviceModel, QubitParams, ideal_device
from qbench.simulator import (
    ShotTable,
    amplitude_damping_kraus,
    dephasing_kraus,
    probabilities_dict,
    run_ideal,
    run_noisy,
    total_variation_distance,
)


class TestIdeal:
    def test_x_flips(self):
        probs = run_ideal(Circuit(1, (x(0), measure_all())))
        assert probabilities_dict(probs, 1) == {"1": 1.0}

    def test_x90_is_balanced(self):
        probs = run_ideal(Circuit(1, (x90(0),)))
        assert probs == pytest.approx([0.5, 0.5])

    def test_y90_is_balanced(self):
        probs = run_ideal(Circuit(1, (y90(0),)))
        assert probs == pytest.approx([0.5, 0.5])

    def test_cz_phase(self):
        # CZ between two superpositions is entangling; check Bell-like stats
        c = Circuit(2, (x90(0), x90(1), cz(0, 1), x90(1)))
        probs = run_ideal(c)
        assert probs.sum() == pytest.approx(1.0)

    def test_bit_order_is_qubit0_leftmost(self):
        probs = run_ideal(Circuit(3, (x(0), measure_all())))
        assert probabilities_dict(probs, 3) == {"100": pytest.approx(1.0)}

    def test_qubit_cap(self):
        with pytest.raises(ValueError):
            run_ideal(Circuit(13, (x(0),)))

    def test_wait_is_noop(self):
        a = run_ideal(Circuit(1, (x90(0), wait(0, 500.0))))
        b = run_ideal(Circuit(1, (x90(0),)))
        assert np.allclose(a, b)


class TestKraus:
    @pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
    def test_amplitude_damping_complete(self, gamma):
        ks = amplitude_damping_kraus(gamma)
        acc = sum(k.conj().T @ k for k in ks)
        assert np.abs(acc - np.eye(2)).max() < 1e-9

    @pytest.mark.parametrize("lam", [0.0, 0.4, 1.0])
    def test_dephasing_complete(self, lam):
        ks = dephasing_kraus(lam)
        acc = sum(k.conj().T @ k for k in ks)
        assert np.abs(acc - np.eye(2)).max() < 1e-9

    def test_dephasing_scales_coherence_linearly(self):
        lam = 0.3
        ks = dephasing_kraus(lam)
        rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        out = sum(k @ rho @ k.conj().T for k in ks)
        assert out[0, 1] == pytest.approx(0.5 * (1 - lam))

    def test_invalid_strengths(self):
        with pytest.raises(ValueError):
            amplitude_damping_kraus(1.5)
        with pytest.raises(ValueError):
            dephasing_kraus(-0.1)


class TestNoisy:
    def test_noiseless_limit_matches_ideal(self):
        dev = ideal_device(3)
        c = Circuit(3, (x90(0), cz(0, 1), y90(1), x(2), measure_all()))
        probs = run_ideal(c)
        table = run_noisy(c, dev, 16384, seed=11)
        assert total_variation_distance(probs, table.frequencies()) < 0.02

    def test_t1_decay_analytic(self, starmon_backend):
        dev = starmon_backend.device
        t1 = dev.qubits[0].t1_us
        c = Circuit(5, (x(0), wait(0, t1 * 1000.0), measure_all()))
        table = run_noisy(c, dev, 4096, seed=42)
        m = dev.qubits[0].readout
        p1_true = math.exp(-1.0) * math.exp(-0.02 / t1)
        expected = p1_true * m[1][1] + (1 - p1_true) * m[0][1]
        # 4-sigma binomial window
        sigma = math.sqrt(expected * (1 - expected) / 4096)
        assert abs(table.fraction_ones(0) - expected) < 4 * sigma

    def test_confusion_matrix_flip(self):
        qp = QubitParams(math.inf, math.inf, readout=((1.0, 0.0), (0.1, 0.9)))
        dev = DeviceModel(qubits=(qp,), p1=(0.0,), p2=0.0)
        table = run_noisy(Circuit(1, (x(0), measure_all())), dev, 40000, seed=3)
        assert table.counts["0"] / 40000 == pytest.approx(0.1, abs=0.01)

    def test_ramsey_envelope(self, starmon_backend):
        dev = starmon_backend.device
        t2 = dev.qubits[0].t2_us
        m = dev.qubits[0].readout
        p1 = dev.p1[0]
        for t_us in (6.0, 12.0):
            c = Circuit(5, (x90(0), wait(0, t_us * 1000.0), x90(0), measure_all()))
            table = run_noisy(c, dev, 60000, seed=5)
            envelope = math.exp(-(t_us + 0.04) / t2) * (1 - p1) ** 2
            ideal_p1 = (1 + envelope) / 2
            expected = ideal_p1 * m[1][1] + (1 - ideal_p1) * m[0][1]
            assert table.fraction_ones(0) == pytest.approx(expected, abs=0.01)

    def test_echo_signal_is_pure_t2_exponential(self, starmon_backend):
        # population relaxation lands in the unmeasured quadrature
        dev = starmon_backend.device
        t2 = dev.qubits[3].t2_us
        m = dev.qubits[3].readout
        p1 = dev.p1[3]
        t_us = 20.0
        c = Circuit(
            5,
            (x90(3), wait(3, t_us * 500.0), x(3), wait(3, t_us * 500.0), x90(3), measure_all()),
        )
        table = run_noisy(c, dev, 60000, seed=5)
        envelope = math.exp(-(t_us + 0.06) / t2) * (1 - p1) ** 3
        ideal_p1 = (1 - envelope) / 2
        expected = ideal_p1 * m[1][1] + (1 - ideal_p1) * m[0][1]
        assert table.fraction_ones(3) == pytest.approx(expected, abs=0.01)

    def test_seed_determinism(self, starmon_backend):
        dev = starmon_backend.device
        c = Circuit(5, (x90(0), cz(0, 2), measure_all()))
        a = run_noisy(c, dev, 2048, seed=9)
        b = run_noisy(c, dev, 2048, seed=9)
        assert a.counts == b.counts

    def test_connectivity_enforced(self, starmon_backend):
        c = Circuit(5, (cz(0, 1), measure_all()))
        with pytest.raises(ValueError):
            run_noisy(c, starmon_backend.device, 10, seed=0)

    def test_width_enforced(self):
        dev = ideal_device(2)
        with pytest.raises(ValueError):
            run_noisy(Circuit(3, (x(2), measure_all())), dev, 10, seed=0)

    def test_correlated_readout_flips_together(self):
        qp = QubitParams(math.inf, math.inf)
        dev = DeviceModel(
            qubits=(qp, qp),
            p1=(0.0, 0.0),
            p2=0.0,
            edges=((0, 1),),
            correlated_readout_epsilon=0.2,
        )
        table = run_noisy(Circuit(2, (measure_all(),)), dev, 20000, seed=4)
        freqs = table.frequencies()
        # joint flips produce 11, never 01/10
        assert freqs[3] == pytest.approx(0.2, abs=0.01)
        assert freqs[1] == 0.0 and freqs[2] == 0.0


class TestDensityInvariants:
    def test_channels_preserve_trace_hermiticity_psd(self, rng):
        from qbench.simulator import _Density, _idle_kraus
        from qbench.cliffords import X90_MAT

        state = _Density(2)
        for step in range(30):
            choice = rng.integers(0, 4)
            if choice == 0:
                state.apply_1q(X90_MAT, int(rng.integers(0, 2)))
            elif choice == 1:
                state.apply_cz(0, 1)
                state.depolarize_2q(0.05, 0, 1)
            elif choice == 2:
                state.depolarize_1q(0.02, int(rng.integers(0, 2)))
            else:
                for kraus in _idle_kraus(15.0, 13.0, 100.0):
                    state.apply_kraus_1q(kraus, int(rng.integers(0, 2)))
            state.check()  # trace and Hermiticity within 1e-9
            m = state.rho.reshape(4, 4)
            assert np.linalg.eigvalsh(m).min() >= -1e-9


class TestShotTable:
    def test_counts_must_sum(self):
        with pytest.raises(ValueError):
            ShotTable(counts={"0": 3}, shots=4, seed=0, n_qubits=1)

    def test_fraction_and_marginal(self):
        t = ShotTable(counts={"10": 30, "01": 70}, shots=100, seed=0, n_qubits=2)
        assert t.fraction_ones(0) == pytest.approx(0.3)
        assert t.marginal((1,)) == {"0": 30, "1": 70}
