"""Sweep harness: plan validation, record layout, statistical sanity,
chunk/worker determinism, and CSV emission."""
from dataclasses import replace

import numpy as np
import pytest

from chest.config import ConfigError, noise_variance_for_snr, validate_config
from chest.experiments import (ExperimentPlan, bml_ranks, build_environment,
                               emit_csv, emit_ecdf_csv, measure_projection_floor,
                               pilot_covariance, run_ecdf, run_nmse_sweep,
                               run_pilot_sweep, run_se_sweep, validate_plan,
                               _chunk_ranges, _nmse_chunk)
from chest.metrics import analytic_nmse


@pytest.fixture(scope="module")
def tiny400(tiny):
    """Same geometry as ``tiny`` but enough trials for statistical checks."""
    return validate_config(replace(tiny.system, n_trials=400), tiny.scenario,
                           tiny.estimator)


@pytest.fixture(scope="module")
def tiny_env(tiny):
    return build_environment(tiny)


@pytest.fixture(scope="module")
def tiny400_nmse(tiny400):
    return run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny400))


class TestValidatePlan:
    def test_unknown_kind(self, tiny):
        with pytest.raises(ConfigError, match="kind"):
            validate_plan(ExperimentPlan(kind="latency", bundle=tiny))

    def test_method_not_valid_for_kind(self, tiny):
        with pytest.raises(ConfigError, match="methods"):
            validate_plan(ExperimentPlan(kind="nmse-sweep", bundle=tiny,
                                         methods=("ideal",)))

    def test_defaults_filled(self, tiny):
        plan = validate_plan(ExperimentPlan(kind="nmse-sweep", bundle=tiny))
        assert plan.methods == ("ls", "denoise", "bml", "emdt")
        plan = validate_plan(ExperimentPlan(kind="ecdf", bundle=tiny))
        assert plan.snr_points == (-10.0, 5.0)
        assert plan.methods == ("ideal", "ls", "denoise", "bml", "emdt")

    def test_pilot_counts_must_divide_grid(self, tiny):
        with pytest.raises(ConfigError, match="divide"):
            validate_plan(ExperimentPlan(kind="pilot-sweep", bundle=tiny,
                                         pilot_counts=(3,)))

    def test_pilot_counts_sorted_unique(self, tiny):
        plan = validate_plan(ExperimentPlan(kind="pilot-sweep", bundle=tiny,
                                            pilot_counts=(8, 2, 8)))
        assert plan.pilot_counts == (2, 8)

    def test_bad_parallelism(self, tiny):
        with pytest.raises(ConfigError):
            validate_plan(ExperimentPlan(kind="ecdf", bundle=tiny, block_size=0))
        with pytest.raises(ConfigError):
            validate_plan(ExperimentPlan(kind="ecdf", bundle=tiny, workers=0))


class TestNmseSweep:
    def test_record_layout(self, tiny):
        records = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny))
        assert len(records) == 12  # 3 SNRs x 4 methods
        assert {r.method for r in records} == {"ls", "denoise", "bml", "emdt"}
        assert {r.snr_db for r in records} == {-10.0, 0.0, 10.0}
        for r in records:
            assert r.trials == 12 and r.n_pilots == 8
            assert r.nmse_emp is not None and r.spectral_efficiency is None
            assert (r.nmse_analytic is not None) == (r.method == "emdt")

    def test_ls_matches_noise_over_snr(self, tiny400, tiny400_nmse):
        """LS NMSE is 1/SNR under the normalized-gain noise calibration."""
        for r in tiny400_nmse:
            if r.method != "ls":
                continue
            expected = 10.0 ** (-r.snr_db / 10.0)
            err_db = 10 * np.log10(r.nmse_emp / expected)
            assert abs(err_db) < 0.5

    def test_common_random_numbers_across_snr(self, tiny400, tiny400_nmse):
        """Noise is drawn once per trial and scaled, so the LS NMSE ratio
        between SNR points equals the noise-variance ratio to float precision."""
        ls = {r.snr_db: r.nmse_emp for r in tiny400_nmse if r.method == "ls"}
        env = build_environment(tiny400)
        nv = {s: noise_variance_for_snr(s, 1.0, env.beta) for s in ls}
        assert ls[-10.0] / ls[10.0] == pytest.approx(nv[-10.0] / nv[10.0],
                                                     rel=1e-12)

    def test_emdt_tracks_analytic_total(self, tiny400_nmse):
        for r in tiny400_nmse:
            if r.method == "emdt":
                err_db = 10 * np.log10(r.nmse_emp / r.nmse_analytic.total)
                assert abs(err_db) < 1.0

    def test_projection_beats_ls_at_low_snr(self, tiny400_nmse):
        by = {(r.method, r.snr_db): r.nmse_emp for r in tiny400_nmse}
        assert by[("emdt", -10.0)] < by[("ls", -10.0)]
        assert by[("bml", -10.0)] < by[("ls", -10.0)]

    def test_extreme_snr_is_stable(self, tiny):
        bundle = validate_config(replace(tiny.system, snr_grid_db=(200.0,)),
                                 tiny.scenario, tiny.estimator)
        records = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=bundle,
                                                methods=("ls",)))
        assert records[0].nmse_emp < 1e-6

    def test_supplied_path_set_changes_results(self, tiny, make_paths):
        paths = make_paths([0.05, 0.2, 0.35, 0.5], powers=[0.4, 0.3, 0.2, 0.1])
        plan = ExperimentPlan(kind="nmse-sweep", bundle=tiny, methods=("emdt",),
                              environment=paths)
        custom = run_nmse_sweep(plan)
        default = run_nmse_sweep(replace(plan, environment=None))
        assert custom[0].nmse_emp != default[0].nmse_emp

    def test_supplied_paths_must_fit_cp(self, tiny, make_paths):
        late = make_paths([0.1, 2.0])  # 2 us exceeds the tiny CP duration
        with pytest.raises(ConfigError, match="CP"):
            run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny,
                                          methods=("ls",), environment=late))


class TestProjectionFloor:
    def test_matches_analytic_floor(self, tiny400):
        env = build_environment(tiny400)
        measured = measure_projection_floor(env, 400)
        analytic = analytic_nmse(env.projectors, pilot_covariance(env), 0.0, 1.0,
                                 noise_variance_for_snr(0.0, 1.0, env.beta))
        assert measured == pytest.approx(analytic.subspace_floor, rel=0.15)

    def test_deterministic(self, tiny_env):
        assert measure_projection_floor(tiny_env, 12) == \
            measure_projection_floor(tiny_env, 12)

    def test_auto_bml_ranks_track_twin(self, tiny_env):
        assert bml_ranks(tiny_env) == (3, 3)


class TestSeSweep:
    def test_ideal_bounds_every_method(self, tiny400):
        records = run_se_sweep(ExperimentPlan(kind="se-sweep", bundle=tiny400))
        assert len(records) == 15  # 3 SNRs x 5 methods
        by = {(r.method, r.snr_db): r.spectral_efficiency for r in records}
        for snr in (-10.0, 0.0, 10.0):
            assert ("ideal", snr) in by
            for m in ("ls", "denoise", "bml", "emdt"):
                # matched combining on the truth maximizes post-combining SNR
                assert by[(m, snr)] <= by[("ideal", snr)] + 1e-9
        assert by[("ls", -10.0)] < by[("emdt", -10.0)]
        for r in records:
            assert r.nmse_emp is None and r.spectral_efficiency >= 0


class TestEcdf:
    def test_table_layout(self, tiny):
        tables = run_ecdf(ExperimentPlan(kind="ecdf", bundle=tiny))
        assert len(tables) == 10  # 2 SNR points x 5 methods
        for (method, snr), table in tables.items():
            assert method in ("ideal", "ls", "denoise", "bml", "emdt")
            assert snr in (-10.0, 5.0)
            assert table.fractions[-1] == pytest.approx(1.0)
            # 12 trials x 16 subcarriers of per-subcarrier samples
            assert table.thresholds.size == 192

    def test_custom_snr_points(self, tiny):
        tables = run_ecdf(ExperimentPlan(kind="ecdf", bundle=tiny,
                                         methods=("ideal",), snr_points=(3.0,)))
        assert set(tables) == {("ideal", 3.0)}


@pytest.fixture(scope="module")
def pilot_records(tiny400):
    return run_pilot_sweep(ExperimentPlan(
        kind="pilot-sweep", bundle=tiny400, pilot_snrs=(0.0,)))


class TestPilotSweep:
    def test_layout(self, pilot_records):
        assert {(r.method, r.n_pilots) for r in pilot_records} == {
            (m, c) for m in ("ls", "emdt") for c in (2, 4, 8, 16)}
        for r in pilot_records:
            assert r.nmse_emp is not None and r.spectral_efficiency is not None

    def test_full_pilot_grid_has_zero_data_rate(self, pilot_records):
        for r in pilot_records:
            if r.n_pilots == 16:
                assert r.spectral_efficiency == 0.0

    def test_emdt_noise_term_shrinks_with_pilots(self, pilot_records):
        """More pilots average more noise into the same low-rank prior."""
        emdt = {r.n_pilots: r.nmse_emp for r in pilot_records if r.method == "emdt"}
        assert emdt[16] < emdt[2]

    def test_ls_nmse_flat_in_pilot_count(self, pilot_records):
        ls = [r.nmse_emp for r in pilot_records if r.method == "ls"]
        assert max(ls) / min(ls) < 10 ** (0.5 / 10)


class TestDeterminism:
    def test_rerun_identical(self, tiny):
        plan = ExperimentPlan(kind="nmse-sweep", bundle=tiny, methods=("ls", "emdt"))
        assert run_nmse_sweep(plan) == run_nmse_sweep(plan)

    def test_seed_changes_results(self, tiny):
        other = validate_config(replace(tiny.system, seed=99), tiny.scenario,
                                tiny.estimator)
        a = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny,
                                          methods=("ls",)))
        b = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=other,
                                          methods=("ls",)))
        assert a[0].nmse_emp != b[0].nmse_emp

    def test_worker_count_does_not_change_csv(self, tiny, tmp_path):
        base = ExperimentPlan(kind="nmse-sweep", bundle=tiny, block_size=5)
        emit_csv(run_nmse_sweep(base), tmp_path / "w1.csv")
        emit_csv(run_nmse_sweep(replace(base, workers=2)), tmp_path / "w2.csv")
        assert (tmp_path / "w1.csv").read_bytes() == (tmp_path / "w2.csv").read_bytes()

    def test_block_size_only_reassociates_sums(self, tiny):
        """Chunk boundaries never change which random numbers a trial sees;
        for chunk-independent methods only the reduction order moves, so the
        pooled NMSE agrees to float round-off.  (Batch-ML is excluded: its
        warm-up is deliberately tied to the trial block.)"""
        a = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny,
                                          methods=("ls", "emdt"), block_size=3))
        b = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny,
                                          methods=("ls", "emdt"), block_size=12))
        for ra, rb in zip(a, b):
            assert (ra.method, ra.snr_db) == (rb.method, rb.snr_db)
            assert ra.nmse_emp == pytest.approx(rb.nmse_emp, rel=1e-12)

    def test_doubling_trials_moves_less_than_3_se(self, tiny400):
        """Pooled-ratio NMSE is stable under doubling the trial count."""
        env = build_environment(tiny400)
        nv = noise_variance_for_snr(0.0, 1.0, env.beta)
        err = np.empty(400)
        gain = np.empty(400)
        for t0, t1 in _chunk_ranges(400, 1):
            per, g = _nmse_chunk(env, nv, t0, t1, ("ls",), 1)
            err[t0] = per["ls"]
            gain[t0] = g
        r200 = err[:200].sum() / gain[:200].sum()
        r400 = err.sum() / gain.sum()
        # delta-method standard error of the pooled ratio at 200 trials
        infl = (err[:200] - r200 * gain[:200]) / gain[:200].mean()
        se200 = infl.std(ddof=1) / np.sqrt(200)
        assert abs(r400 - r200) < 3 * se200


class TestCsvEmission:
    def test_schema_and_row_count(self, tiny, tmp_path):
        records = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny))
        out = tmp_path / "nmse.csv"
        emit_csv(records, out)
        lines = out.read_text().splitlines()
        assert len(lines) == 13
        assert lines[0] == ("method,snr_db,n_pilots,nmse_emp,nmse_floor,"
                            "nmse_noise,se_bps_hz,trials")
        methods = [ln.split(",")[0] for ln in lines[1:]]
        assert methods == sorted(methods)  # bml, denoise, emdt, ls blocks

    def test_na_fields_are_empty(self, tiny, tmp_path):
        records = run_nmse_sweep(ExperimentPlan(kind="nmse-sweep", bundle=tiny))
        out = tmp_path / "nmse.csv"
        emit_csv(records, out)
        for ln in out.read_text().splitlines()[1:]:
            cells = ln.split(",")
            if cells[0] == "emdt":
                assert cells[4] != "" and cells[5] != ""
            else:
                assert cells[4] == "" and cells[5] == ""
            assert cells[6] == ""  # no SE column in an NMSE sweep

    def test_se_rows_fill_se_column(self, tiny, tmp_path):
        records = run_se_sweep(ExperimentPlan(kind="se-sweep", bundle=tiny,
                                              methods=("ideal", "ls")))
        out = tmp_path / "se.csv"
        emit_csv(records, out)
        for ln in out.read_text().splitlines()[1:]:
            cells = ln.split(",")
            assert cells[3] == "" and cells[6] != ""

    def test_empty_records_leave_no_file(self, tmp_path):
        out = tmp_path / "never.csv"
        with pytest.raises(ValueError):
            emit_csv([], out)
        assert not out.exists()

    def test_ecdf_csv_groups_end_at_one(self, tiny, tmp_path):
        tables = run_ecdf(ExperimentPlan(kind="ecdf", bundle=tiny,
                                         methods=("ls", "ideal")))
        out = tmp_path / "ecdf.csv"
        emit_ecdf_csv(tables, out)
        lines = out.read_text().splitlines()
        assert lines[0] == "method,snr_db,sample_snr_db,cum_frac"
        last_frac = {}
        for ln in lines[1:]:
            method, snr, _, frac = ln.split(",")
            last_frac[(method, snr)] = frac
        assert len(last_frac) == 4
        assert all(v == "1" for v in last_frac.values())
