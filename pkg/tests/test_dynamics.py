import numpy as np
import pytest

import dimwitness as dw
from dimwitness.errors import ContractViolationError, IngestError

from conftest import rand_pm_observable, rand_state


def constant_series(value, length=5):
    return dw.TimeSeries(np.full(length, float(value)), shots=0, provenance="exact")


class TestTimeSeries:
    def test_rejects_even_length(self):
        with pytest.raises(ContractViolationError, match="odd"):
            dw.TimeSeries(np.zeros(4), shots=0, provenance="exact")

    def test_rejects_out_of_range_values(self):
        with pytest.raises(ContractViolationError, match=r"\[-1, 1\]"):
            dw.TimeSeries(np.array([0.0, 1.5, 0.0]), shots=0, provenance="exact")

    def test_rejects_unknown_provenance(self):
        with pytest.raises(ContractViolationError, match="provenance"):
            dw.TimeSeries(np.zeros(3), shots=0, provenance="guessed")

    def test_delay_size(self):
        assert constant_series(0.0, length=19).delay_size == 10


class TestExactSeries:
    def test_identity_evolution_is_constant(self, rng):
        rho, m = rand_state(2, rng), rand_pm_observable(2, rng)
        series = dw.exact_series(dw.identity_superop(2), rho, m, 5)
        np.testing.assert_allclose(series.values, dw.expectation(m, rho), atol=1e-12)
        assert series.provenance == "exact"
        assert series.shots == 0

    def test_commuting_observable_is_constant(self):
        # M = Z commutes with a phase gate, so the series never moves
        u = np.diag([1.0, np.exp(0.7j)])
        t = dw.unitary_superop(u)
        rho = dw.pure_state(np.array([0.6, 0.8]))
        m = dw.basis_parity_observable(2)
        series = dw.exact_series(t, rho, m, 6)
        np.testing.assert_allclose(series.values, series.values[0], atol=1e-12)

    def test_matches_spectral_reconstruction(self, rng):
        u = dw.haar_unitary(2, rng)
        t = dw.unitary_superop(u)
        rho, m = rand_state(2, rng), rand_pm_observable(2, rng)
        series = dw.exact_series(t, rho, m, 10)
        sd = dw.spectral_decompose(t, m, rho)
        for step, value in enumerate(series.values):
            assert sd.reconstruct(step) == pytest.approx(value, abs=1e-8)

    def test_prefix_consistency(self, rng):
        t = dw.random_cptp(2, rng)
        rho, m = rand_state(2, rng), rand_pm_observable(2, rng)
        long = dw.exact_series(t, rho, m, 12)
        short = dw.exact_series(t, rho, m, 5)
        np.testing.assert_array_equal(long.values[: len(short)], short.values)

    def test_stroboscopic_consistency(self, rng):
        t = dw.random_cptp(2, rng)
        rho, m = rand_state(2, rng), rand_pm_observable(2, rng)
        doubled = dw.Superoperator(2, t.matrix @ t.matrix)
        coarse = dw.exact_series(doubled, rho, m, 5).values
        fine = dw.exact_series(t, rho, m, 10).values[::2][: coarse.size]
        np.testing.assert_allclose(coarse, fine, atol=1e-10)

    def test_requires_two_delays(self, rng):
        with pytest.raises(ContractViolationError):
            dw.exact_series(dw.identity_superop(2), rand_state(2, rng), rand_pm_observable(2, rng), 1)


class TestSampleSeries:
    def test_deterministic_endpoints(self, rng):
        ones = constant_series(1.0)
        np.testing.assert_array_equal(dw.sample_series(ones, 100, rng).values, np.ones(5))
        minus = constant_series(-1.0)
        np.testing.assert_array_equal(dw.sample_series(minus, 100, rng).values, -np.ones(5))

    def test_mean_and_variance_at_half(self):
        # 1e5 draws at p+ = 1/2, n = 8192: mean within 5 sigma of 0,
        # variance within 5% of 4 p(1-p)/n = 1/8192
        n = 8192
        zeros = constant_series(0.0, length=9)
        draws = np.concatenate(
            [dw.sample_series(zeros, n, np.random.default_rng([81, rep])).values
             for rep in range(11_112)]
        )[:100_000]
        sigma_mean = (1.0 / np.sqrt(n)) / np.sqrt(draws.size)
        assert abs(draws.mean()) < 5 * sigma_mean
        assert draws.var() == pytest.approx(1.0 / n, rel=0.05)

    def test_noise_shrinks_with_shots(self, rng):
        u = dw.haar_unitary(2, rng)
        t = dw.unitary_superop(u)
        rho, m = rand_state(2, rng), rand_pm_observable(2, rng)
        exact = dw.exact_series(t, rho, m, 10)
        p99 = []
        for n in (100, 10_000, 1_000_000):
            errs = [
                np.max(np.abs(dw.sample_series(exact, n, np.random.default_rng([82, n, rep])).values - exact.values))
                for rep in range(200)
            ]
            p99.append(np.percentile(errs, 99))
        assert p99[0] > p99[1] > p99[2]

    def test_requires_exact_input(self, rng):
        sampled = dw.sample_series(constant_series(0.5), 100, rng)
        with pytest.raises(ContractViolationError, match="exact"):
            dw.sample_series(sampled, 100, rng)

    def test_metadata(self, rng):
        out = dw.sample_series(constant_series(0.5), 64, rng, seed=[1, 2])
        assert out.shots == 64
        assert out.provenance == "sampled"
        assert out.seed == [1, 2]

    def test_values_near_boundary_are_clipped_safely(self, rng):
        edge = constant_series(np.nextafter(1.0, 2.0))  # 1 + 1 ulp, inside tolerance
        out = dw.sample_series(edge, 50, rng)
        np.testing.assert_array_equal(out.values, np.ones(5))


class TestSerialization:
    def test_round_trip_is_bit_exact(self, tmp_path, rng):
        u = dw.haar_unitary(2, rng)
        t = dw.unitary_superop(u)
        exact = dw.exact_series(t, rand_state(2, rng), rand_pm_observable(2, rng), 7)
        sampled = dw.sample_series(exact, 8192, rng, seed=7)
        path = tmp_path / "series.csv"
        dw.write_series(sampled, path)
        loaded = dw.read_series(path)
        np.testing.assert_array_equal(loaded.values, sampled.values)
        assert loaded.shots == sampled.shots
        assert loaded.provenance == sampled.provenance
        assert loaded.seed == sampled.seed

    def test_csv_header(self, tmp_path):
        path = tmp_path / "series.csv"
        dw.write_series(constant_series(0.25), path)
        assert path.read_text().splitlines()[0] == "t,value"

    def test_missing_sidecar_raises(self, tmp_path):
        path = tmp_path / "series.csv"
        dw.write_series(constant_series(0.25), path)
        path.with_suffix(".json").unlink()
        with pytest.raises(IngestError, match="sidecar"):
            dw.read_series(path)

    def test_malformed_rows_raise(self, tmp_path):
        path = tmp_path / "series.csv"
        path.write_text("t,value\n0,0.1\n2,0.2\n")
        path.with_suffix(".json").write_text('{"shots": 0, "provenance": "exact"}')
        with pytest.raises(IngestError, match="non-contiguous"):
            dw.read_series(path)
