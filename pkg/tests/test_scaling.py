import json
import math
from concurrent.futures import ThreadPoolExecutor
import pytest
from scipy.stats import spearmanr
from application import scaling_service
from application.random_streams import RandomStreams
from application.scaling_service import (
    ScalingStudyService,
    default_fit_window,
    fit_exponential,
    fit_summary_rows,
    measure_usa_probability,
    optimize_noise,
    sweep_noise,
)
from application.walksat_engine import flip_statistics
from domain.entities.run_record import RunRecord, WalkSatParams
from domain.entities.study import StudyConfig, UsaCurvePoint
from domain.exceptions import BudgetExhaustedError, FitError, NoiseOptimizationError
from domain.value_objects.types import CandidateVerdict, ModelFamily, NoiseMode
from infrastructure.persistence.csv_study_repository import CsvStudyRepository, read_summary_table


def _stub_runner(flips_for_noise):
    """노이즈만 보고 플립 수를 정하는 가짜 WalkSAT 실행 함수를 만듭니다."""

    def run(formula, params, instance_id=""):
        return RunRecord(
            instance_id=instance_id,
            noise=params.noise,
            flips_to_solution=flips_for_noise(params.noise),
            tries=1,
            wall_time=0.0,
            seed=params.seed,
        )

    return run


def _study_config(output_dir, **overrides):
    values = dict(
        family=ModelFamily.XORSAT_3REG,
        sizes=(12, 16, 20),
        instances_per_size=4,
        base_params=WalkSatParams(),
        noise_mode=NoiseMode.DEFAULT,
        master_seed=11,
        output_dir=output_dir,
    )
    values.update(overrides)
    return StudyConfig(**values)


def _run_study(config):
    return ScalingStudyService(CsvStudyRepository(config.output_dir)).run_scaling_study(config)


class TestExponentialFit:
    """지수 피팅 테스트"""

    def test_exact_exponential(self):
        """2·e^(0.1N) 은 A=2, mu=0.1 로 정확히 복원됩니다."""
        points = [(n, 2.0 * math.exp(0.1 * n)) for n in (10, 20, 30, 40)]
        fit = fit_exponential(points)
        assert fit.fit_window == (20, 30, 40)
        assert fit.prefactor == pytest.approx(2.0, rel=1e-9)
        assert fit.mu == pytest.approx(0.1, rel=1e-9)
        assert all(abs(r) < 1e-9 for r in fit.residuals)
        assert fit.predict(50) == pytest.approx(2.0 * math.exp(5.0))

    def test_constant_medians(self):
        """중앙값이 일정하면 mu 는 0입니다."""
        fit = fit_exponential([(10, 5.0), (20, 5.0), (30, 5.0)])
        assert fit.mu == pytest.approx(0.0, abs=1e-12)
        assert fit.prefactor == pytest.approx(5.0)

    def test_single_size_rejected(self):
        """점이 3개 미만이면 피팅을 거부합니다."""
        with pytest.raises(FitError, match="fit window < 3 points"):
            fit_exponential([(10, 5.0)])

    def test_censored_sizes_excluded(self):
        """검열된 크기는 구간에서 빠지고 따로 기록됩니다."""
        points = [(n, math.exp(0.05 * n)) for n in (10, 20, 30, 40)] + [(50, math.inf)]
        fit = fit_exponential(points, window=(10, 20, 30, 40, 50), excluded=(50,))
        assert fit.fit_window == (10, 20, 30, 40)
        assert fit.excluded_sizes == (50,)
        assert fit.mu == pytest.approx(0.05)

    def test_non_positive_median_rejected(self):
        """0인 중앙값은 로그를 취할 수 없으므로 거부합니다."""
        with pytest.raises(FitError):
            fit_exponential([(10, 0.0), (20, 5.0), (30, 7.0)])

    def test_noisy_slope_within_two_stderr(self, rng):
        """로그 정규 잡음 합성을 반복하면 mu 가 약 95% 비율로 2 표준오차 안에 듭니다."""
        sizes = list(range(10, 210, 5))
        repeats = 400
        covered = 0
        for _ in range(repeats):
            noise = rng.normal(0.0, 0.1, size=len(sizes))
            points = [(n, 3.0 * math.exp(0.05 * n + xi)) for n, xi in zip(sizes, noise)]
            fit = fit_exponential(points, window=sizes)
            covered += abs(fit.mu - 0.05) <= 2 * fit.mu_stderr
        assert covered / repeats >= 0.92

    def test_default_window(self):
        """기본 구간은 큰 절반(올림, 최소 3개)입니다."""
        assert default_fit_window(list(range(24, 97, 8))) == (64, 72, 80, 88, 96)
        assert default_fit_window([8, 16, 32]) == (8, 16, 32)
        assert default_fit_window([1, 2, 3, 4, 5, 6, 7]) == (4, 5, 6, 7)

    def test_fit_summary_rows(self):
        """집계 표 행에서 검열 표시를 읽어 제외합니다."""
        rows = [
            {"N": str(n), "median": repr(3.0 * math.exp(0.2 * n)), "censored": "0"} for n in (4, 8, 12)
        ] + [{"N": "16", "median": "inf", "censored": "1"}]
        fit = fit_summary_rows(rows, window=(4, 8, 12, 16))
        assert fit.mu == pytest.approx(0.2)
        assert fit.excluded_sizes == (16,)


class TestNoiseOptimization:
    """노이즈 최적화 테스트"""

    def test_golden_section_converges(self):
        """볼록한 목적 함수에서 0.02 이내로 최적 노이즈를 찾습니다."""
        runner = _stub_runner(lambda p: int(1e6 * (p - 0.37) ** 2) + 10)
        optimum = optimize_noise(None, WalkSatParams(), 3, RandomStreams(5), runner=runner)
        assert abs(optimum.noise - 0.37) <= 0.02
        assert len(optimum.probes) > 9
        assert len(optimum.probe_records) == 3 * len(optimum.probes)
        assert len(optimum.best_records) == 3

    def test_probe_seeds_are_distinct(self):
        """탐색 지점과 실행마다 다른 시드를 씁니다."""
        runner = _stub_runner(lambda p: int(1000 * abs(p - 0.5)) + 1)
        optimum = optimize_noise(None, WalkSatParams(), 2, RandomStreams(9), runner=runner)
        seeds = [record.seed for record in optimum.probe_records]
        assert len(set(seeds)) == len(seeds)

    def test_zero_flips_everywhere(self):
        """모든 실행이 0 플립이면 최적값도 0입니다."""
        optimum = optimize_noise(None, WalkSatParams(), 1, RandomStreams(1), runner=_stub_runner(lambda p: 0))
        assert optimum.flips == 0

    def test_all_not_found(self):
        """모든 탐색 지점이 실패하면 기록과 함께 NoiseOptimizationError 입니다."""
        with pytest.raises(NoiseOptimizationError) as excinfo:
            optimize_noise(None, WalkSatParams(), 2, RandomStreams(1), runner=_stub_runner(lambda p: None))
        assert len(excinfo.value.records) == 18

    def test_sweep_noise(self):
        """노이즈별 통계를 입력 순서대로 돌려줍니다."""
        runner = _stub_runner(lambda p: int(100 * p))
        sweep = sweep_noise(None, [0.2, 0.6], 3, RandomStreams(2), runner=runner)
        assert [noise for noise, _ in sweep] == [0.2, 0.6]
        assert [stats.median for _, stats in sweep] == [20, 60]


class TestUsaProbability:
    """USA 비율 측정 테스트"""

    def test_single_trial_is_degenerate(self):
        """시행이 1회이면 표준오차가 0으로 퇴화합니다."""
        point = measure_usa_probability(ModelFamily.XORSAT_3REG, 12, 1, master_seed=3)
        assert point.degenerate
        assert point.stderr == 0.0

    def test_binomial_stderr(self):
        """표준오차는 sqrt(p(1-p)/trials) 입니다."""
        point = UsaCurvePoint(n_vars=32, trials=100, usa_count=25)
        assert point.p_usa == 0.25
        assert point.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
        assert point.to_dict()["inv_n"] == repr(1 / 32)

    def test_same_seed_same_count(self):
        """같은 시드에서는 같은 USA 개수가 나옵니다."""
        first = measure_usa_probability(ModelFamily.LOCKED_1IN3, 16, 20, master_seed=4)
        second = measure_usa_probability(ModelFamily.LOCKED_1IN3, 16, 20, master_seed=4)
        assert first == second

    def test_usa_curve_file(self, temp_data_dir):
        """USA 곡선 CSV 가 크기별로 한 행씩 저장됩니다."""
        service = ScalingStudyService(CsvStudyRepository(temp_data_dir))
        points = service.run_usa_curve(ModelFamily.XORSAT_POISSON, (12, 16), 10, 7)
        rows = read_summary_table(temp_data_dir / "xorsat-poisson_usa_curve.csv")
        assert [row["N"] for row in rows] == ["12", "16"]
        assert [int(row["usa_count"]) for row in rows] == [p.usa_count for p in points]

    def test_skipped_candidates_leave_trials(self, monkeypatch):
        """예산 초과로 건너뛴 후보는 시행 수에서 빠지고 따로 기록됩니다."""
        verdicts = iter([CandidateVerdict.SKIPPED, CandidateVerdict.USA, CandidateVerdict.NOT_USA] * 2)
        monkeypatch.setattr(scaling_service, "screen_candidate", lambda instance, node_budget: next(verdicts))
        point = measure_usa_probability(ModelFamily.XORSAT_3REG, 12, 6, master_seed=1)
        assert (point.trials, point.usa_count, point.skipped) == (4, 2, 2)
        assert point.p_usa == 0.5
        assert point.to_dict()["skipped"] == "2"

    def test_every_candidate_over_budget(self):
        """노드 예산 0이면 모든 locked 후보가 건너뛰어져 예산 오류입니다."""
        with pytest.raises(BudgetExhaustedError):
            measure_usa_probability(ModelFamily.LOCKED_1IN3, 16, 5, master_seed=2, node_budget=0)


class TestScalingStudy:
    """스케일링 연구 전체 흐름 테스트"""

    def test_study_writes_result_files(self, temp_data_dir):
        """연구는 실행 기록, 집계, 피팅, 플롯 파일을 남깁니다."""
        result = _run_study(_study_config(temp_data_dir))
        for suffix in ("runs.jsonl", "summary.csv", "fit.json", "plot.csv"):
            assert (temp_data_dir / f"xorsat-3reg_{suffix}").exists()
        assert not (temp_data_dir / "xorsat-3reg_probe_runs.jsonl").exists()

        repository = CsvStudyRepository(temp_data_dir)
        rows = repository.load_summary(ModelFamily.XORSAT_3REG)
        assert [row["N"] for row in rows] == ["12", "16", "20"]
        assert all(row["usa_instances"] == "4" for row in rows)
        loaded = repository.load_run_records(ModelFamily.XORSAT_3REG)
        assert [r.to_dict() for r in loaded] == [r.to_dict() for r in result.records]
        assert all(r.instance_id.startswith("xorsat-3reg-N") for r in loaded)

    def test_study_is_reproducible_across_workers(self, temp_data_dir):
        """같은 시드는 작업자 수와 무관하게 같은 파일을 만듭니다."""
        first = temp_data_dir / "one"
        second = temp_data_dir / "two"
        _run_study(_study_config(first))
        _run_study(_study_config(second, workers=2))
        for suffix in ("runs.jsonl", "summary.csv", "fit.json", "plot.csv"):
            name = f"xorsat-3reg_{suffix}"
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_single_size_records_fit_error(self, temp_data_dir):
        """크기가 하나뿐이면 피팅 사유가 fit.json 에 남습니다."""
        result = _run_study(_study_config(temp_data_dir, sizes=(12,), instances_per_size=2))
        assert result.fit is None
        document = json.loads((temp_data_dir / "xorsat-3reg_fit.json").read_text(encoding="utf-8"))
        assert document["error"] == "fit window < 3 points"
        assert document["mu"] is None

    def test_insufficient_candidates_flagged(self, temp_data_dir):
        """후보 상한 안에 목표 개수를 못 채우면 insufficient 로 표시합니다."""
        config = _study_config(temp_data_dir, sizes=(12,), instances_per_size=5, max_candidates_per_size=1)
        result = _run_study(config)
        summary = result.summaries[0]
        assert summary.insufficient
        assert summary.usa_instances <= 1

    def test_optimized_mode_saves_probe_runs(self, temp_data_dir):
        """노이즈 최적화 모드는 탐색 기록을 따로 저장합니다."""
        config = _study_config(
            temp_data_dir,
            family=ModelFamily.LOCKED_1IN3,
            sizes=(10, 12, 14),
            instances_per_size=1,
            noise_mode=NoiseMode.OPTIMIZED,
            runs_per_probe=2,
        )
        result = _run_study(config)
        assert (temp_data_dir / "locked-1in3_probe_runs.jsonl").exists()
        assert len(result.probe_records) >= 3 * 9 * 2
        assert len(result.records) == 3

    def test_optimized_median_uses_each_instance_optimum(self, temp_data_dir):
        """최적화 모드의 크기별 중앙값은 인스턴스별 최적 노이즈 중앙값들의 중앙값입니다."""
        config = _study_config(
            temp_data_dir,
            family=ModelFamily.LOCKED_1IN3,
            sizes=(10, 12, 14),
            instances_per_size=3,
            noise_mode=NoiseMode.OPTIMIZED,
            runs_per_probe=2,
        )
        result = _run_study(config)
        for summary in result.summaries:
            prefix = f"locked-1in3-N{summary.n_vars}-"
            per_instance = []
            for record in result.records:
                if not record.instance_id.startswith(prefix):
                    continue
                best = [
                    run.cost
                    for run in result.probe_records
                    if run.instance_id == record.instance_id and run.noise == record.noise
                ]
                assert len(best) == 2
                per_instance.append(sum(best) / 2)
            assert summary.statistics.median == pytest.approx(flip_statistics(per_instance).median)

    def test_skipped_candidates_counted_in_summary(self, temp_data_dir):
        """DPLL 예산을 넘긴 후보는 skipped 로 집계 표에 남습니다."""
        config = _study_config(
            temp_data_dir,
            family=ModelFamily.LOCKED_1IN3,
            sizes=(12,),
            instances_per_size=2,
            max_candidates_per_size=10,
            dpll_node_budget=0,
        )
        summary = _run_study(config).summaries[0]
        assert summary.skipped == 10
        assert summary.usa_instances == 0
        assert summary.insufficient
        rows = CsvStudyRepository(temp_data_dir).load_summary(ModelFamily.LOCKED_1IN3)
        assert rows[0]["skipped"] == "10"

    def test_one_worker_pool_per_study(self, temp_data_dir, monkeypatch):
        """작업자 풀은 크기나 배치마다가 아니라 연구마다 한 번 만듭니다."""
        created = []

        class CountingPool(ThreadPoolExecutor):
            def __init__(self, max_workers):
                created.append(max_workers)
                super().__init__(max_workers=max_workers)

        monkeypatch.setattr(scaling_service, "ProcessPoolExecutor", CountingPool)
        result = _run_study(_study_config(temp_data_dir, workers=2))
        assert created == [2]
        assert all(summary.usa_instances == 4 for summary in result.summaries)


FAMILY_ORDER = (
    ModelFamily.UNLOCKED_1IN3,
    ModelFamily.LOCKED_1IN3,
    ModelFamily.LOCKED_2IN4,
    ModelFamily.XORSAT_POISSON,
    ModelFamily.XORSAT_3REG,
)
DESK_LADDER = tuple(range(24, 97, 8))


def _desk_studies(root, noise_mode, runs_per_probe=11):
    return {
        family: _run_study(
            _study_config(
                root,
                family=family,
                sizes=DESK_LADDER,
                instances_per_size=100,
                noise_mode=noise_mode,
                runs_per_probe=runs_per_probe,
                master_seed=1,
                workers=4,
            )
        )
        for family in FAMILY_ORDER
    }


@pytest.fixture(scope="module")
def default_studies(tmp_path_factory):
    return _desk_studies(tmp_path_factory.mktemp("default"), NoiseMode.DEFAULT)


@pytest.fixture(scope="module")
def optimized_studies(tmp_path_factory):
    return _desk_studies(tmp_path_factory.mktemp("optimized"), NoiseMode.OPTIMIZED, runs_per_probe=5)


def _median_error(statistics):
    # 중앙값 노치 폭 (1.58·IQR/sqrt(n))
    return 1.58 * (statistics.q75 - statistics.q25) / math.sqrt(statistics.count)


@pytest.mark.slow
class TestScalingOrdering:
    """계열별 성장률 비교 (느림, 24..96 사다리에서 크기별 USA 100개)"""

    def test_mu_ordering_across_families(self, default_studies):
        """기본 노이즈의 mu 는 Exact Cover < locked 1-in-3 < locked 2-in-4 < 3-XORSAT < 3-regular 순입니다."""
        fits = [default_studies[family].fit for family in FAMILY_ORDER]
        assert all(fit is not None for fit in fits)
        for lower, upper in zip(fits, fits[1:]):
            assert upper.mu - lower.mu > math.hypot(lower.mu_stderr, upper.mu_stderr)

    def test_3reg_mu_band(self, default_studies):
        """3-regular 3-XORSAT 의 mu 는 [0.08, 0.17] 안에 있습니다."""
        fit = default_studies[ModelFamily.XORSAT_3REG].fit
        assert fit is not None
        assert 0.08 <= fit.mu <= 0.17

    @pytest.mark.parametrize("family", FAMILY_ORDER)
    def test_median_flips_grow_with_n(self, default_studies, family):
        """플립 수 중앙값은 N 을 따라 표본 오차 안에서 줄지 않습니다."""
        summaries = default_studies[family].summaries
        assert all(summary.usa_instances == 100 for summary in summaries)
        medians = [summary.statistics.median for summary in summaries]
        correlation, _ = spearmanr(DESK_LADDER, medians)
        assert correlation > 0.9
        for smaller, larger in zip(summaries, summaries[1:]):
            assert larger.statistics.median >= smaller.statistics.median - _median_error(smaller.statistics)

    @pytest.mark.parametrize("family", FAMILY_ORDER)
    def test_optimized_noise_lowers_mu(self, default_studies, optimized_studies, family):
        """인스턴스별 노이즈 최적화의 mu 는 기본 노이즈보다 작습니다."""
        default_fit = default_studies[family].fit
        optimized_fit = optimized_studies[family].fit
        assert default_fit is not None and optimized_fit is not None
        assert optimized_fit.mu < default_fit.mu

    @pytest.mark.parametrize("family", FAMILY_ORDER)
    def test_optimized_median_not_above_default(self, default_studies, optimized_studies, family):
        """크기마다 최적화 중앙값은 기본 노이즈 중앙값에 표본 오차를 더한 값 이하입니다."""
        pairs = zip(default_studies[family].summaries, optimized_studies[family].summaries)
        for default, optimized in pairs:
            limit = default.statistics.median + _median_error(default.statistics)
            assert optimized.statistics.median <= limit
