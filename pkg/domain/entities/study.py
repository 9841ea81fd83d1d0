import math
from dataclasses import dataclass, field
from pathlib import Path
from domain.entities.run_record import FlipStatistics, RunRecord, WalkSatParams
from domain.value_objects.types import (
    DEFAULT_DPLL_NODE_BUDGET,
    DEFAULT_REJECTION_BUDGET,
    ModelFamily,
    NoiseMode,
)


@dataclass(frozen=True, slots=True)
class StudyConfig:
    """스케일링 연구 설정입니다.

    Attributes:
        family: 모델 계열
        sizes: 크기 사다리 (엄격히 증가)
        instances_per_size: 크기별 USA 인스턴스 수
        base_params: 기본 WalkSAT 파라미터
        noise_mode: 기본 노이즈 또는 인스턴스별 최적화
        master_seed: 모든 난수 스트림의 기준 시드
        output_dir: 결과 저장 디렉토리
        runs_per_probe: 노이즈 탐색 지점별 실행 수
        max_candidates_per_size: 크기별 생성 후보 상한
        fit_window: 피팅에 사용할 N 목록 (None 이면 큰 절반)
        workers: 병렬 작업자 수
        rejection_budget: 생성 기각 샘플링 상한
        dpll_node_budget: DPLL 노드 상한
    """
    family: ModelFamily
    sizes: tuple[int, ...]
    instances_per_size: int
    base_params: WalkSatParams
    noise_mode: NoiseMode
    master_seed: int
    output_dir: Path
    runs_per_probe: int = 11
    max_candidates_per_size: int | None = None
    fit_window: tuple[int, ...] | None = None
    workers: int = 1
    rejection_budget: int = DEFAULT_REJECTION_BUDGET
    dpll_node_budget: int = DEFAULT_DPLL_NODE_BUDGET

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if not self.sizes:
            raise ValueError("크기 사다리가 비어 있습니다")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("크기 사다리는 엄격히 증가해야 합니다")
        if self.instances_per_size < 1:
            raise ValueError("크기별 인스턴스 수는 1 이상이어야 합니다")
        if self.runs_per_probe < 1:
            raise ValueError("runs_per_probe 는 1 이상이어야 합니다")
        if self.workers < 1:
            raise ValueError("작업자 수는 1 이상이어야 합니다")
        if self.fit_window is not None and not set(self.fit_window) <= set(self.sizes):
            raise ValueError("피팅 구간은 크기 사다리의 부분집합이어야 합니다")

    @property
    def candidate_limit(self) -> int:
        if self.max_candidates_per_size is not None:
            return self.max_candidates_per_size
        return self.instances_per_size * 1000


@dataclass(frozen=True, slots=True)
class SizeSummary:
    """한 크기에서의 집계 결과입니다.

    Attributes:
        n_vars: 요청한 크기 N
        statistics: 플립 수 통계
        usa_instances: 확보한 USA 인스턴스 수
        insufficient: 생성 예산 안에 목표 개수를 채우지 못했는지 여부
        skipped: 예산 초과로 판정하지 못하고 건너뛴 후보 수
    """
    n_vars: int
    statistics: FlipStatistics
    usa_instances: int
    insufficient: bool = False
    skipped: int = 0

    def to_dict(self) -> dict[str, str]:
        stats = self.statistics
        return {
            "N": str(self.n_vars),
            "median": repr(stats.median),
            "q25": repr(stats.q25),
            "q75": repr(stats.q75),
            "solved_fraction": repr(stats.solved_fraction),
            "censored": str(int(stats.censored)),
            "usa_instances": str(self.usa_instances),
            "insufficient": str(int(self.insufficient)),
            "skipped": str(self.skipped),
        }


@dataclass(frozen=True, slots=True)
class ScalingFit:
    """N_flips = A·exp(mu·N) 피팅 결과입니다.

    Attributes:
        prefactor: A
        mu: 변수당 지수 성장률
        fit_window: 피팅에 사용한 N
        residuals: ln(median) 잔차
        mu_stderr: mu 의 표준오차
        excluded_sizes: 검열되어 제외된 N
    """
    prefactor: float
    mu: float
    fit_window: tuple[int, ...]
    residuals: tuple[float, ...]
    mu_stderr: float
    excluded_sizes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if not self.prefactor > 0:
            raise ValueError("A 는 양수여야 합니다")
        if len(self.fit_window) < 3:
            raise ValueError("피팅 구간은 3개 이상의 점이 필요합니다")

    def predict(self, n_vars: int) -> float:
        return self.prefactor * math.exp(self.mu * n_vars)


@dataclass(frozen=True, slots=True)
class UsaCurvePoint:
    """한 크기에서 측정한 USA 확률입니다.

    Attributes:
        n_vars: 크기 N
        trials: 판정을 마친 인스턴스 수 (건너뛴 후보 제외)
        usa_count: USA 인스턴스 수
        skipped: 예산 초과로 건너뛴 후보 수
    """
    n_vars: int
    trials: int
    usa_count: int
    skipped: int = 0

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if self.trials < 1:
            raise ValueError("시행 횟수는 1 이상이어야 합니다")
        if not 0 <= self.usa_count <= self.trials:
            raise ValueError("USA 개수는 0 과 시행 횟수 사이여야 합니다")
        if self.skipped < 0:
            raise ValueError("건너뛴 후보 수는 음수일 수 없습니다")

    @property
    def p_usa(self) -> float:
        return self.usa_count / self.trials

    @property
    def stderr(self) -> float:
        p = self.p_usa
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def degenerate(self) -> bool:
        """이항 표준오차가 0으로 퇴화했는지 여부입니다."""
        return self.usa_count in (0, self.trials)

    def to_dict(self) -> dict[str, str]:
        return {
            "N": str(self.n_vars),
            "inv_n": repr(1.0 / self.n_vars),
            "trials": str(self.trials),
            "usa_count": str(self.usa_count),
            "p_usa": repr(self.p_usa),
            "err": repr(self.stderr),
            "degenerate": str(int(self.degenerate)),
            "skipped": str(self.skipped),
        }


@dataclass(frozen=True, slots=True)
class NoiseOptimum:
    """노이즈 최적화 결과입니다.

    Attributes:
        noise: 플립 중앙값을 최소화한 노이즈
        flips: 해당 노이즈에서의 플립 중앙값
        probes: 탐색한 (노이즈, 중앙값) 목록 (탐색 순서)
        best_records: 최적 노이즈에서의 실행 기록
        probe_records: 탐색 중 수행한 모든 실행 기록
    """
    noise: float
    flips: float
    probes: tuple[tuple[float, float], ...]
    best_records: tuple[RunRecord, ...] = ()
    probe_records: tuple[RunRecord, ...] = ()


@dataclass(frozen=True, slots=True)
class StudyResult:
    """스케일링 연구 전체 결과입니다.

    Attributes:
        config: 연구 설정
        summaries: 크기별 집계
        fit: 지수 피팅 결과 (불가능하면 None)
        fit_error: 피팅을 거부한 사유
        records: 인스턴스별 대표 실행 기록
        probe_records: 노이즈 최적화 중 수행한 모든 실행 기록
    """
    config: StudyConfig
    summaries: tuple[SizeSummary, ...]
    fit: ScalingFit | None
    fit_error: str | None = None
    records: tuple[RunRecord, ...] = field(default=())
    probe_records: tuple[RunRecord, ...] = field(default=())
