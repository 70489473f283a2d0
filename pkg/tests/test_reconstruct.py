import io

import numpy as np
import pytest

from strobetomo.analysis import ObservableSpec, random_admissible_observable
from strobetomo.channels import (
    ThreeLevelParams,
    TwoLevelParams,
    generator_three_level,
    generator_two_level,
)
from strobetomo.matcore import ConditioningError, vec
from strobetomo.reconstruct import (
    MeasurementRecord,
    TimeGrid,
    alpha_at,
    default_time_grid,
    evolve,
    execute,
    expectation,
    measure,
    plan,
    reconstruct_trajectory,
    records_from_csv,
    records_to_csv,
    simulate_records,
)

GEN_2 = generator_two_level(TwoLevelParams(0.1, 0.2, 0.3, gamma=1.0))
GEN_3_CLUSTERED = generator_three_level(
    ThreeLevelParams(0.1, 0.15, 0.2, 0.05, 0.08, 0.06, gamma=1.0)
)
RHO_2 = np.array([[0.7, 0.1 + 0.2j], [0.1 - 0.2j, 0.3]])
Q_2 = np.array([[1.0, 1.0 + 1.0j], [1.0 - 1.0j, 0.0]])  # (A,B,C,D) = (1,0,1,1)


def random_density(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


class TestTimeGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(instants=(), horizon=1.0)
        with pytest.raises(ValueError):
            TimeGrid(instants=(0.0, 0.5), horizon=1.0)  # instants must be > 0
        with pytest.raises(ValueError):
            TimeGrid(instants=(0.5, 0.5), horizon=1.0)  # strictly increasing
        with pytest.raises(ValueError):
            TimeGrid(instants=(0.5, 1.5), horizon=1.0)  # horizon too short

    def test_default_grid_two_level(self):
        """Equispaced with horizon 1/|lambda|_max = 1/1.0 for the worked example."""
        grid = default_time_grid(GEN_2, 3)
        assert grid.p == 3
        assert grid.horizon == pytest.approx(1.0)
        np.testing.assert_allclose(grid.instants, [1 / 3, 2 / 3, 1.0])

    def test_default_grid_three_level(self):
        grid = default_time_grid(GEN_3_CLUSTERED, 8)
        assert grid.p == 8
        assert grid.horizon == pytest.approx(1.0 / 0.93)
        np.testing.assert_allclose(grid.instants, [(j + 1) / 8 / 0.93 for j in range(8)])

    def test_default_grid_rejects_degenerate_generator(self):
        gen = generator_two_level(TwoLevelParams(0.2, 0.2, 0.3, gamma=1.0))
        with pytest.raises(ValueError, match="eta"):
            default_time_grid(gen, 3)


class TestAlphaCoefficients:
    def test_exponential_identity(self):
        """exp(L t) = sum_k alpha_k(t) L^k holds exactly on a simple spectrum."""
        from scipy.linalg import expm

        for t in (0.1, 0.7, 2.0):
            alpha = alpha_at(GEN_2, t)
            total = np.zeros((4, 4), dtype=complex)
            power = np.eye(4, dtype=complex)
            for coeff in alpha.coefficients:
                total = total + coeff * power
                power = power @ GEN_2
            np.testing.assert_allclose(total, expm(GEN_2 * t), atol=1e-10)
            assert alpha.residual() < 1e-10

    def test_needs_simple_spectrum(self):
        gen = generator_two_level(TwoLevelParams(0.2, 0.2, 0.3, gamma=1.0))
        with pytest.raises(ValueError):
            alpha_at(gen, 0.5)


class TestEvolveAndMeasure:
    def test_evolution_preserves_state_structure(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            rho = random_density(rng, 2)
            t = rng.uniform(0, 5)
            out = evolve(GEN_2, rho, t)
            assert abs(np.trace(out).real - 1.0) < 1e-12
            assert np.max(np.abs(out - out.conj().T)) < 1e-12
            assert np.linalg.eigvalsh(out).min() > -1e-10

    def test_maximally_mixed_state_is_stationary(self):
        rho = np.eye(2) / 2
        for t in (0.5, 3.0, 20.0):
            np.testing.assert_allclose(evolve(GEN_2, rho, t), rho, atol=1e-13)

    def test_expectation_real_for_hermitian(self):
        rho = random_density(np.random.default_rng(31), 2)
        val = expectation(Q_2, rho)
        assert isinstance(val, float)
        assert val == pytest.approx(np.trace(Q_2 @ rho).real)

    def test_exact_measurement(self):
        rec = measure(Q_2, RHO_2, "exact", t=0.4)
        assert rec.shots == "exact"
        assert rec.t == 0.4
        assert rec.value == pytest.approx(expectation(Q_2, RHO_2))

    def test_shot_noise_converges_to_expectation(self):
        truth = expectation(Q_2, RHO_2)
        rec = measure(Q_2, RHO_2, 10**6, seed=99)
        assert rec.value == pytest.approx(truth, abs=5e-3)

    def test_measurement_is_seeded(self):
        a = measure(Q_2, RHO_2, 1000, seed=7)
        b = measure(Q_2, RHO_2, 1000, seed=7)
        c = measure(Q_2, RHO_2, 1000, seed=8)
        assert a.value == b.value
        assert a.value != c.value

    def test_invalid_state_rejected(self):
        bad = np.array([[1.5, 0.0], [0.0, -0.5]])  # Born probability -0.5 < -1e-8
        with pytest.raises(ValueError, match="density"):
            measure(np.diag([1.0, -1.0]), bad, 100, seed=0)

    def test_simulate_records_deterministic(self):
        grid = default_time_grid(GEN_2, 3)
        a = simulate_records(GEN_2, Q_2, RHO_2, grid, 500, seed=3)
        b = simulate_records(GEN_2, Q_2, RHO_2, grid, 500, seed=3)
        assert [r.value for r in a] == [r.value for r in b]
        assert [r.t for r in a] == list(grid.instants)


class TestPlan:
    def test_worked_example_plan(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        assert p.valid
        assert p.dim == 2
        assert p.p == 3
        assert p.condition_reduced < 1e8
        # orthonormalized working basis: the Gram matrix is the identity
        np.testing.assert_allclose(p.gram_matrix, np.eye(4), atol=1e-12)
        assert p.condition_gram == pytest.approx(1.0, abs=1e-10)
        # first basis element is I/sqrt(2), fixing the trace projection
        np.testing.assert_allclose(p.basis[0], np.eye(2) / np.sqrt(2), atol=1e-12)

    def test_wrong_instant_count(self):
        grid = TimeGrid(instants=(0.2, 0.5), horizon=1.0)
        with pytest.raises(ValueError, match="n\\^2 - 1"):
            plan(GEN_2, Q_2, grid)

    def test_degenerate_generator_rejected(self):
        gen = generator_two_level(TwoLevelParams(0.2, 0.2, 0.3, gamma=1.0))
        grid = TimeGrid(instants=(0.3, 0.6, 1.0), horizon=1.0)
        with pytest.raises(ValueError, match="eta"):
            plan(gen, Q_2, grid)

    def test_inadmissible_observable_rejected(self):
        grid = default_time_grid(GEN_2, 3)
        with pytest.raises(ValueError, match="span"):
            plan(GEN_2, np.diag([1.0, -1.0]), grid)

    def test_clustered_three_level_hits_conditioning_gate(self):
        """The 3-level worked example cannot be inverted in float64.

        Five decay rates within 0.10 of each other put the best achievable
        design conditioning near 1e10 (measured by direct optimization over
        instants and observables), above the 1e8 validity bound, so the
        plan must refuse rather than return garbage.
        """
        rng = np.random.default_rng(32)
        x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        q = (x + x.conj().T) / 2
        grid = default_time_grid(GEN_3_CLUSTERED, 8)
        with pytest.raises((ConditioningError, ValueError)):
            plan(GEN_3_CLUSTERED, q, grid)

    def test_alpha_rows_match_forward_rows(self):
        """The two representations of exp(L* t)[Q] agree on the grid."""
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        for j, t in enumerate(grid.instants):
            # build exp(L* t)[Q] from the alpha expansion and project it
            total = np.zeros(4, dtype=complex)
            power = vec(np.asarray(Q_2, dtype=complex))
            for coeff in p.alpha_matrix[j]:
                total = total + coeff * power
                power = GEN_2.conj().T @ power
            np.testing.assert_allclose(
                [np.vdot(vec(b), total).real for b in p.basis],
                p.forward_matrix[j],
                atol=1e-9,
            )


class TestExecute:
    def test_worked_example_round_trip(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, "exact")
        result = execute(p, records)
        assert np.linalg.norm(result.estimate - RHO_2) < 1e-8
        assert result.trace_defect < 1e-12
        assert result.hermiticity_defect < 1e-10
        assert result.residual_norm < 1e-10
        assert np.trace(result.estimate).real == pytest.approx(1.0, abs=1e-14)

    def test_random_round_trips_two_level(self):
        rng = np.random.default_rng(33)
        grid = default_time_grid(GEN_2, 3)
        for seed in range(10):
            obs = random_admissible_observable(GEN_2, seed)
            p = plan(GEN_2, obs, grid)
            rho = random_density(rng, 2)
            records = simulate_records(GEN_2, obs.matrix, rho, grid, "exact")
            result = execute(p, records)
            assert np.linalg.norm(result.estimate - rho) < 1e-8

    def test_record_order_does_not_matter(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, "exact")
        result = execute(p, list(reversed(records)))
        assert np.linalg.norm(result.estimate - RHO_2) < 1e-8

    def test_mismatched_records_rejected(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, "exact")
        with pytest.raises(ValueError, match="expected 3 records"):
            execute(p, records[:2])
        shifted = [MeasurementRecord(t=r.t + 0.01, value=r.value, shots=r.shots) for r in records]
        with pytest.raises(ValueError, match="instant"):
            execute(p, shifted)

    def test_psd_projection_output(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, 200, seed=5)
        result = execute(p, records, psd_project=True)
        assert result.psd_estimate is not None
        evals = np.linalg.eigvalsh(result.psd_estimate)
        assert evals.min() > -1e-14
        assert np.trace(result.psd_estimate).real == pytest.approx(1.0, abs=1e-12)

    def test_trajectory_round_trip(self):
        grid = default_time_grid(GEN_2, 3)
        p = plan(GEN_2, Q_2, grid)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, "exact")
        result = execute(p, records)
        times = [0.0, 0.5, 1.7]
        recovered = reconstruct_trajectory(GEN_2, result, times)
        for t, rho_hat in zip(times, recovered):
            np.testing.assert_allclose(rho_hat, evolve(GEN_2, RHO_2, t), atol=1e-8)


class TestRecordCsv:
    def test_round_trip_exact_floats(self, tmp_path):
        grid = default_time_grid(GEN_2, 3)
        records = simulate_records(GEN_2, Q_2, RHO_2, grid, 1234, seed=17)
        path = tmp_path / "records.csv"
        records_to_csv(records, path)
        back = records_from_csv(path)
        assert back == records  # bitwise equality through repr round trip

    def test_exact_shots_round_trip(self):
        buf = io.StringIO()
        records = [MeasurementRecord(t=0.25, value=-0.125, shots="exact")]
        records_to_csv(records, buf)
        buf.seek(0)
        assert records_from_csv(buf) == records

    def test_header_is_mandatory(self):
        buf = io.StringIO("0.1,0.2,100\n")
        with pytest.raises(ValueError, match="header"):
            records_from_csv(buf)

    def test_malformed_row(self):
        buf = io.StringIO("t,value,shots\n0.1,0.2\n")
        with pytest.raises(ValueError, match="row"):
            records_from_csv(buf)
