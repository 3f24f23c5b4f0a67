import pytest

from qbench.backends import (
    CapabilityError,
    JobNotFoundError,
    LocalSimBackend,
    UniformRandomBackend,
    submit_and_wait,
)
from qbench.circuits import Circuit, cz, measure_all, x



class TestLocalBackend:
    def test_submit_and_wait_order_preserving(self, ideal_backend_5):
        c0 = Circuit(5, (x(0), measure_all()), label="a")
        c1 = Circuit(5, (x(1), measure_all()), label="b")
        tables = submit_and_wait(ideal_backend_5, [c0, c1], 64, seed=5)
        assert tables[0].counts == {"10000": 64}
        assert tables[1].counts == {"01000": 64}

    def test_empty_batch(self, ideal_backend_5):
        assert submit_and_wait(ideal_backend_5, [], 10, seed=0) == []

    def test_results_repeatable(self, starmon_backend):
        c = Circuit(5, (x(0), measure_all()))
        handle = starmon_backend.submit([c], 128, seed=3)
        first = starmon_backend.result(handle)
        second = starmon_backend.result(handle)
        assert first[0].counts == second[0].counts

    def test_unknown_handle(self, starmon_backend):
        with pytest.raises(JobNotFoundError):
            starmon_backend.result("nope")

    def test_capability_width(self, starmon_backend):
        too_wide = Circuit(6, (x(5), measure_all()))
        with pytest.raises(CapabilityError):
            submit_and_wait(starmon_backend, [too_wide], 8, seed=0)

    def test_capability_connectivity(self, starmon_backend):
        disconnected = Circuit(5, (cz(0, 1), measure_all()))
        with pytest.raises(CapabilityError):
            submit_and_wait(starmon_backend, [disconnected], 8, seed=0)

    def test_same_seed_same_tables(self, starmon_backend):
        c = Circuit(5, (x(2), measure_all()))
        t1 = submit_and_wait(starmon_backend, [c], 256, seed=7)[0]
        t2 = submit_and_wait(starmon_backend, [c], 256, seed=7)[0]
        assert t1.counts == t2.counts

    def test_preferred_order_center_first(self, starmon_backend):
        order = starmon_backend.preferred_qubit_order()
        assert order[0] == 2  # the star center
        assert sorted(order) == [0, 1, 2, 3, 4]


class TestUniformBackend:
    def test_flat_distribution(self):
        be = UniformRandomBackend(2)
        c = Circuit(2, (measure_all(),))
        table = submit_and_wait(be, [c], 40000, seed=1)[0]
        for key in ("00", "01", "10", "11"):
            assert table.counts[key] / 40000 == pytest.approx(0.25, abs=0.02)
