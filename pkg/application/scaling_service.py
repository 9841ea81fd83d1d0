import logging
import math
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, replace
from scipy import stats
from application.cnf_encoder import encode_instance
from application.instance_generator import generate_instance, screen_candidate
from application.random_streams import FAMILY_KEYS, RandomStreams
from application.walksat_engine import flip_statistics, median_flips, walksat_run
from domain.entities.cnf_formula import CnfFormula
from domain.entities.instance import Instance
from domain.entities.model_spec import ModelSpec
from domain.entities.run_record import FlipStatistics, RunRecord, WalkSatParams
from domain.entities.study import (
    NoiseOptimum,
    ScalingFit,
    SizeSummary,
    StudyConfig,
    StudyResult,
    UsaCurvePoint,
)
from domain.exceptions import BudgetExhaustedError, FitError, NoiseOptimizationError, RejectionBudgetExceeded
from domain.repositories.study_repository import StudyRepository
from domain.value_objects.types import (
    DEFAULT_DPLL_NODE_BUDGET,
    DEFAULT_REJECTION_BUDGET,
    CandidateVerdict,
    ModelFamily,
    NoiseMode,
)


logger = logging.getLogger(__name__)

Runner = Callable[..., RunRecord]

NOISE_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
INVPHI = (math.sqrt(5) - 1) / 2
INVPHI2 = (3 - math.sqrt(5)) / 2
SCREEN_BATCH = 64

# 스트림 키: (계열, N) 아래에서 0 = 인스턴스 생성, 1 = WalkSAT
GENERATION_KEY = 0
WALKSAT_KEY = 1


def size_streams(master_seed: int, family: ModelFamily, n_vars: int) -> RandomStreams:
    return RandomStreams(master_seed, FAMILY_KEYS[family], n_vars)


def _representative(records: Sequence[RunRecord]) -> RunRecord:
    ordered = sorted(records, key=lambda record: record.cost)
    return ordered[(len(ordered) - 1) // 2]


def sweep_noise(
    formula: CnfFormula,
    noises: Iterable[float],
    runs: int,
    streams: RandomStreams,
    base: WalkSatParams | None = None,
    runner: Runner = walksat_run,
    instance_id: str = "",
) -> list[tuple[float, FlipStatistics]]:
    """주어진 노이즈마다 runs 번 실행해 플립 수 통계를 구합니다.

    k 번째 노이즈의 r 번째 실행 시드는 streams.seed_for(k, r) 입니다.

    Args:
        formula: CNF 식
        noises: 탐색할 노이즈 목록
        runs: 노이즈별 실행 수
        streams: 시드 스트림
        base: 노이즈 외 파라미터
        runner: WalkSAT 실행 함수
        instance_id: 기록용 인스턴스 식별자

    Returns:
        (노이즈, 통계) 목록
    """
    if runs < 1:
        raise ValueError("노이즈별 실행 수는 1 이상이어야 합니다")
    base = base or WalkSatParams()
    sweep = []
    for probe, noise in enumerate(noises):
        records = [
            runner(formula, replace(base, noise=noise, seed=streams.seed_for(probe, run)), instance_id=instance_id)
            for run in range(runs)
        ]
        sweep.append((noise, median_flips(records)))
    return sweep


class _NoiseProbe:
    """노이즈별 중앙값을 한 번만 계산하도록 기억하는 목적 함수입니다."""

    def __init__(self, formula, base, runs, streams, runner, instance_id):
        self._formula = formula
        self._base = base
        self._runs = runs
        self._streams = streams
        self._runner = runner
        self._instance_id = instance_id
        self.medians: dict[float, float] = {}
        self.records: dict[float, tuple[RunRecord, ...]] = {}

    def __call__(self, noise: float) -> float:
        if noise in self.medians:
            return self.medians[noise]
        probe = len(self.medians)
        records = tuple(
            self._runner(
                self._formula,
                replace(self._base, noise=noise, seed=self._streams.seed_for(probe, run)),
                instance_id=self._instance_id,
            )
            for run in range(self._runs)
        )
        median = median_flips(records).median
        self.medians[noise] = median
        self.records[noise] = records
        return median


def _golden_section(objective: Callable[[float], float], a: float, b: float, tolerance: float) -> None:
    h = b - a
    if h <= tolerance:
        return
    steps = int(math.ceil(math.log(tolerance / h) / math.log(INVPHI)))
    c = a + INVPHI2 * h
    d = a + INVPHI * h
    yc = objective(c)
    yd = objective(d)
    for _ in range(steps - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h = INVPHI * h
            c = a + INVPHI2 * h
            yc = objective(c)
        else:
            a, c, yc = c, d, yd
            h = INVPHI * h
            d = a + INVPHI * h
            yd = objective(d)


def optimize_noise(
    formula: CnfFormula,
    base: WalkSatParams,
    runs_per_probe: int,
    streams: RandomStreams,
    runner: Runner = walksat_run,
    instance_id: str = "",
    tolerance: float = 0.02,
) -> NoiseOptimum:
    """플립 수 중앙값을 최소화하는 노이즈를 찾습니다.

    0.1 간격 격자를 먼저 훑고, 격자 최솟값 주변 구간에서 황금분할 탐색을
    구간 폭이 tolerance 이하가 될 때까지 진행합니다. 탐색한 모든 지점 중
    중앙값이 가장 작은 지점을 반환합니다 (동률이면 작은 노이즈).

    Args:
        formula: CNF 식
        base: 노이즈 외 파라미터
        runs_per_probe: 탐색 지점별 실행 수
        streams: 시드 스트림 (탐색 번호, 실행 번호로 분할)
        runner: WalkSAT 실행 함수
        instance_id: 기록용 인스턴스 식별자
        tolerance: 황금분할 종료 구간 폭

    Returns:
        NoiseOptimum

    Raises:
        ValueError: runs_per_probe 가 1 미만인 경우
        NoiseOptimizationError: 모든 탐색 지점이 해를 찾지 못한 경우
    """
    if runs_per_probe < 1:
        raise ValueError("runs_per_probe 는 1 이상이어야 합니다")
    objective = _NoiseProbe(formula, base, runs_per_probe, streams, runner, instance_id)
    grid = [(objective(noise), noise) for noise in NOISE_GRID]
    all_records = tuple(record for records in objective.records.values() for record in records)
    best_flips, best_grid = min(grid)
    if math.isinf(best_flips):
        raise NoiseOptimizationError("모든 노이즈 탐색 지점에서 해를 찾지 못했습니다", records=all_records)

    low = max(0.0, round(best_grid - 0.1, 1))
    high = min(1.0, round(best_grid + 0.1, 1))
    _golden_section(objective, low, high, tolerance)

    flips, noise = min((median, noise) for noise, median in objective.medians.items())
    logger.debug(
        "노이즈 최적화를 마쳤습니다",
        extra={"instance_id": instance_id, "noise": noise, "flips": flips, "probes": len(objective.medians)},
    )
    return NoiseOptimum(
        noise=noise,
        flips=flips,
        probes=tuple(objective.medians.items()),
        best_records=objective.records[noise],
        probe_records=tuple(record for records in objective.records.values() for record in records),
    )


def default_fit_window(sizes: Sequence[int]) -> tuple[int, ...]:
    """크기 사다리의 큰 절반(올림, 최소 3개)을 반환합니다."""
    ordered = sorted(sizes)
    count = max(3, math.ceil(len(ordered) / 2))
    return tuple(ordered[-count:])


def fit_exponential(
    points: Sequence[tuple[int, float]],
    window: Sequence[int] | None = None,
    excluded: Sequence[int] = (),
) -> ScalingFit:
    """ln(median) 을 N 에 대해 최소제곱 직선으로 맞춰 A·exp(mu·N) 을 구합니다.

    Args:
        points: (N, 플립 중앙값) 목록
        window: 피팅에 사용할 N (None 이면 큰 절반)
        excluded: 검열되어 구간에서 뺄 N

    Returns:
        ScalingFit

    Raises:
        FitError: 구간의 점이 3개 미만이거나 중앙값이 양의 유한값이 아닌 경우
    """
    medians = dict(points)
    window = tuple(sorted(window)) if window is not None else default_fit_window(list(medians))
    excluded = set(excluded)
    dropped = tuple(n for n in window if n in excluded)
    used = [n for n in window if n not in excluded and n in medians]
    if len(used) < 3:
        raise FitError("fit window < 3 points")
    for n in used:
        if not (math.isfinite(medians[n]) and medians[n] > 0):
            raise FitError(f"N={n} 의 중앙값이 양의 유한값이 아닙니다: {medians[n]}")

    log_medians = [math.log(medians[n]) for n in used]
    result = stats.linregress(used, log_medians)
    residuals = tuple(y - (result.intercept + result.slope * n) for n, y in zip(used, log_medians))
    return ScalingFit(
        prefactor=math.exp(result.intercept),
        mu=float(result.slope),
        fit_window=tuple(used),
        residuals=residuals,
        mu_stderr=float(result.stderr),
        excluded_sizes=dropped,
    )


@dataclass(frozen=True, slots=True)
class _CandidateTask:
    family: ModelFamily
    n_vars: int
    n_clauses: int
    master_seed: int
    index: int
    rejection_budget: int
    node_budget: int


@dataclass(frozen=True, slots=True)
class _InstanceTask:
    instance: Instance
    instance_id: str
    base_params: WalkSatParams
    noise_mode: NoiseMode
    runs_per_probe: int
    master_seed: int
    index: int


def _screen_candidate(task: _CandidateTask) -> tuple[CandidateVerdict, Instance | None]:
    """후보 하나를 생성하고 판정합니다 (작업자 프로세스에서 실행)."""
    spec = ModelSpec.for_family(task.family, task.n_vars, task.n_clauses)
    rng = size_streams(task.master_seed, task.family, task.n_vars).generator(GENERATION_KEY, task.index)
    try:
        instance = generate_instance(spec, rng, task.rejection_budget)
    except RejectionBudgetExceeded:
        logger.warning("후보 생성이 기각 예산을 넘었습니다", extra={"index": task.index, "n_vars": task.n_vars})
        return CandidateVerdict.SKIPPED, None
    verdict = screen_candidate(instance, task.node_budget)
    return verdict, instance if verdict is CandidateVerdict.USA else None


def _run_instance(task: _InstanceTask) -> tuple[RunRecord, float, tuple[RunRecord, ...]]:
    """인스턴스 하나에 WalkSAT 을 돌려 대표 기록, 인스턴스 플립 수, 탐색 기록을 반환합니다.

    최적화 모드의 인스턴스 플립 수는 최적 노이즈에서의 중앙값입니다.
    """
    family = task.instance.family
    streams = size_streams(task.master_seed, family, task.instance.n_vars).child(WALKSAT_KEY, task.index)
    formula = encode_instance(task.instance)
    if task.noise_mode is NoiseMode.DEFAULT:
        params = replace(task.base_params, seed=streams.seed_for())
        record = walksat_run(formula, params, instance_id=task.instance_id)
        return record, record.cost, ()
    try:
        optimum = optimize_noise(formula, task.base_params, task.runs_per_probe, streams, instance_id=task.instance_id)
    except NoiseOptimizationError as error:
        logger.warning("노이즈 최적화에 실패했습니다", extra={"instance_id": task.instance_id})
        return error.records[0], math.inf, error.records
    return _representative(optimum.best_records), optimum.flips, optimum.probe_records


def _map_tasks(function, tasks: list, executor: Executor | None) -> list:
    # 결과 순서는 작업 순서를 따르므로 작업자 수와 무관합니다
    if executor is None or len(tasks) <= 1:
        return [function(task) for task in tasks]
    return list(executor.map(function, tasks))


def measure_usa_probability(
    family: ModelFamily,
    n_vars: int,
    trials: int,
    master_seed: int,
    rejection_budget: int = DEFAULT_REJECTION_BUDGET,
    node_budget: int = DEFAULT_DPLL_NODE_BUDGET,
    n_clauses: int | None = None,
) -> UsaCurvePoint:
    """인스턴스를 trials 개 생성해 USA 비율을 측정합니다.

    생성 스트림은 스케일링 연구와 같으므로 같은 시드에서는 같은 후보를
    봅니다. 가지치기 후 절이 남지 않은 인스턴스는 USA 로 세지 않습니다.
    생성 또는 DPLL 예산을 넘긴 후보는 skipped 로 기록하고 시행 수에서
    뺍니다.

    Args:
        family: 모델 계열
        n_vars: 크기 N
        trials: 생성할 인스턴스 수
        master_seed: 기준 시드
        rejection_budget: 생성 기각 상한
        node_budget: DPLL 노드 상한
        n_clauses: 절 개수 (None 이면 계열 규칙)

    Returns:
        UsaCurvePoint

    Raises:
        BudgetExhaustedError: 모든 후보가 예산 초과로 건너뛰어진 경우
    """
    if trials < 1:
        raise ValueError("시행 횟수는 1 이상이어야 합니다")
    spec = ModelSpec.for_family(family, n_vars, n_clauses)
    verdicts = Counter(
        _screen_candidate(
            _CandidateTask(family, n_vars, spec.n_clauses, master_seed, index, rejection_budget, node_budget)
        )[0]
        for index in range(trials)
    )
    skipped = verdicts[CandidateVerdict.SKIPPED]
    if skipped == trials:
        raise BudgetExhaustedError(f"N={n_vars} 의 모든 후보가 예산 초과로 건너뛰어졌습니다")
    point = UsaCurvePoint(
        n_vars=n_vars, trials=trials - skipped, usa_count=verdicts[CandidateVerdict.USA], skipped=skipped
    )
    logger.info(
        "USA 확률을 측정했습니다",
        extra={
            "family": family.value,
            "n_vars": n_vars,
            "p_usa": point.p_usa,
            "trials": point.trials,
            "skipped": skipped,
        },
    )
    return point


class ScalingStudyService:
    """스케일링 연구 유스케이스를 처리하는 서비스입니다.

    Attributes:
        study_repository: 결과 저장소
    """

    def __init__(self, study_repository: StudyRepository):
        """서비스를 초기화합니다.

        Args:
            study_repository: 결과 저장소 구현체
        """
        self.study_repository = study_repository

    def _collect_usa_instances(
        self, config: StudyConfig, n_vars: int, n_clauses: int, executor: Executor | None
    ) -> tuple[list[tuple[int, Instance]], int]:
        found: list[tuple[int, Instance]] = []
        skipped = 0
        limit = config.candidate_limit
        start = 0
        while len(found) < config.instances_per_size and start < limit:
            indices = range(start, min(start + SCREEN_BATCH, limit))
            tasks = [
                _CandidateTask(
                    config.family,
                    n_vars,
                    n_clauses,
                    config.master_seed,
                    index,
                    config.rejection_budget,
                    config.dpll_node_budget,
                )
                for index in indices
            ]
            for index, (verdict, instance) in zip(indices, _map_tasks(_screen_candidate, tasks, executor)):
                if len(found) >= config.instances_per_size:
                    break
                if verdict is CandidateVerdict.SKIPPED:
                    skipped += 1
                elif instance is not None:
                    found.append((index, instance))
            start += SCREEN_BATCH
        return found, skipped

    def _run_size(
        self, config: StudyConfig, n_vars: int, executor: Executor | None
    ) -> tuple[SizeSummary, list[RunRecord], list[RunRecord]]:
        spec = ModelSpec.for_family(config.family, n_vars)
        found, skipped = self._collect_usa_instances(config, n_vars, spec.n_clauses, executor)
        insufficient = len(found) < config.instances_per_size
        if insufficient:
            logger.warning(
                "생성 예산 안에 USA 인스턴스를 충분히 찾지 못했습니다",
                extra={"n_vars": n_vars, "found": len(found), "wanted": config.instances_per_size},
            )

        tasks = [
            _InstanceTask(
                instance=instance,
                instance_id=f"{config.family.value}-N{n_vars}-{index}",
                base_params=config.base_params,
                noise_mode=config.noise_mode,
                runs_per_probe=config.runs_per_probe,
                master_seed=config.master_seed,
                index=index,
            )
            for index, instance in found
        ]
        results = _map_tasks(_run_instance, tasks, executor)
        records = [record for record, _, _ in results]
        instance_flips = [flips for _, flips, _ in results]
        probe_records = [record for _, _, probes in results for record in probes]

        if instance_flips:
            statistics = flip_statistics(instance_flips)
        else:
            statistics = FlipStatistics(math.inf, math.inf, math.inf, 0.0, True, 0)
        summary = SizeSummary(
            n_vars=n_vars,
            statistics=statistics,
            usa_instances=len(found),
            insufficient=insufficient,
            skipped=skipped,
        )
        logger.info(
            "크기별 측정을 마쳤습니다",
            extra={"n_vars": n_vars, "median": statistics.median, "usa_instances": len(found), "skipped": skipped},
        )
        return summary, records, probe_records

    def run_scaling_study(self, config: StudyConfig) -> StudyResult:
        """크기 사다리 전체에 대해 스케일링 연구를 수행하고 결과를 저장합니다.

        Args:
            config: 연구 설정

        Returns:
            StudyResult (피팅이 불가능하면 fit=None, fit_error 에 사유)
        """
        summaries: list[SizeSummary] = []
        records: list[RunRecord] = []
        probe_records: list[RunRecord] = []
        pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else nullcontext()
        with pool as executor:
            for n_vars in config.sizes:
                summary, size_records, size_probes = self._run_size(config, n_vars, executor)
                summaries.append(summary)
                records.extend(size_records)
                probe_records.extend(size_probes)

        censored = [s.n_vars for s in summaries if s.statistics.censored]
        fit: ScalingFit | None = None
        fit_error: str | None = None
        try:
            fit = fit_exponential(
                [(s.n_vars, s.statistics.median) for s in summaries],
                window=config.fit_window,
                excluded=censored,
            )
        except FitError as error:
            fit_error = str(error)
            logger.warning("지수 피팅을 수행할 수 없습니다", extra={"reason": fit_error})

        family = config.family
        self.study_repository.save_run_records(family, records)
        if config.noise_mode is NoiseMode.OPTIMIZED:
            self.study_repository.save_run_records(family, probe_records, name="probe_runs")
        self.study_repository.save_summary(family, summaries)
        self.study_repository.save_fit(family, fit, fit_error)
        self.study_repository.save_plot_data(family, summaries)
        return StudyResult(
            config=config,
            summaries=tuple(summaries),
            fit=fit,
            fit_error=fit_error,
            records=tuple(records),
            probe_records=tuple(probe_records),
        )

    def run_usa_curve(
        self,
        family: ModelFamily,
        sizes: Sequence[int],
        trials: int,
        master_seed: int,
        rejection_budget: int = DEFAULT_REJECTION_BUDGET,
        node_budget: int = DEFAULT_DPLL_NODE_BUDGET,
    ) -> list[UsaCurvePoint]:
        """크기 사다리마다 USA 확률을 측정하고 곡선을 저장합니다.

        Args:
            family: 모델 계열
            sizes: 크기 목록
            trials: 크기별 시행 횟수
            master_seed: 기준 시드
            rejection_budget: 생성 기각 상한
            node_budget: DPLL 노드 상한

        Returns:
            크기별 UsaCurvePoint
        """
        points = [
            measure_usa_probability(family, n_vars, trials, master_seed, rejection_budget, node_budget)
            for n_vars in sizes
        ]
        self.study_repository.save_usa_curve(family, points)
        return points


def fit_summary_rows(rows: Sequence[dict[str, str]], window: Sequence[int] | None = None) -> ScalingFit:
    """집계 표의 행(N, median, censored 열)을 피팅합니다.

    Raises:
        FitError: 피팅이 불가능한 경우
        KeyError: 필요한 열이 없는 경우
    """
    points = [(int(row["N"]), float(row["median"])) for row in rows]
    censored = [int(row["N"]) for row in rows if row.get("censored", "0") == "1"]
    return fit_exponential(points, window=window, excluded=censored)
