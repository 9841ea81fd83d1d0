import logging
from collections.abc import Sequence
from pathlib import Path
from application.cnf_encoder import encode_instance
from application.exact_solver import dpll_count_upto2, solve_instance
from application.instance_generator import gauge_transform, generate_instance, is_usa_candidate
from application.random_streams import generator_from_seed
from application.scaling_service import (
    GENERATION_KEY,
    ScalingStudyService,
    fit_summary_rows,
    size_streams,
)
from application.walksat_engine import walksat_run
from domain.entities.cnf_formula import CnfFormula
from domain.entities.instance import Instance
from domain.entities.model_spec import ModelSpec
from domain.entities.run_record import RunRecord, WalkSatParams
from domain.entities.solver_results import SolveOutcome
from domain.entities.study import ScalingFit, StudyConfig, StudyResult, UsaCurvePoint
from domain.value_objects.types import ModelFamily
from infrastructure.persistence.csv_study_repository import CsvStudyRepository
from infrastructure.persistence.dimacs import write_dimacs


logger = logging.getLogger(__name__)


class BenchmarkCommands:
    """벤치마크 CLI 명령어를 처리하는 클래스입니다.

    각 메서드는 서비스 호출을 감싸고 실패를 기록한 뒤 예외를 다시 던집니다.
    """

    def generate(
        self,
        family: ModelFamily,
        n_vars: int,
        n_clauses: int | None,
        count: int,
        seed: int,
        rejection_budget: int,
        random_parity: bool = False,
    ) -> list[Instance]:
        """인스턴스를 생성합니다.

        i 번째 인스턴스는 스케일링 연구의 i 번째 후보와 같은 스트림을 씁니다.

        Args:
            family: 모델 계열
            n_vars: 변수 개수
            n_clauses: 절 개수 (None 이면 계열 규칙)
            count: 생성할 개수
            seed: 기준 시드
            rejection_budget: 기각 샘플링 상한
            random_parity: XORSAT 패리티를 무작위로 할지 여부

        Returns:
            인스턴스 목록
        """
        try:
            spec = ModelSpec.for_family(family, n_vars, n_clauses)
            streams = size_streams(seed, family, n_vars)
            instances = [
                generate_instance(spec, streams.generator(GENERATION_KEY, index), rejection_budget, random_parity)
                for index in range(count)
            ]
            logger.info(
                "인스턴스를 생성했습니다",
                extra={"family": family.value, "n_vars": n_vars, "n_clauses": spec.n_clauses, "count": count},
            )
            return instances
        except Exception:
            logger.exception("인스턴스 생성 중 오류가 발생했습니다")
            raise

    def filter_instances(
        self, instances: Sequence[Instance], node_budget: int, keep_all: bool = False, gauge: bool = False
    ) -> list[Instance]:
        """USA 인스턴스를 골라 유일해를 기록합니다.

        Args:
            instances: 판정할 인스턴스
            node_budget: DPLL 노드 상한
            keep_all: USA 가 아닌 인스턴스도 남길지 여부
            gauge: XORSAT USA 를 게이지 변환할지 여부

        Returns:
            출력할 인스턴스 목록
        """
        try:
            kept = []
            usa_count = 0
            for instance in instances:
                usa = is_usa_candidate(instance, node_budget)
                usa_count += usa
                if usa and gauge and instance.family.is_xorsat:
                    instance = gauge_transform(instance, instance.known_solution)
                if usa or keep_all:
                    kept.append(instance)
            logger.info("USA 필터를 마쳤습니다", extra={"total": len(instances), "usa": usa_count})
            return kept
        except Exception:
            logger.exception("USA 필터 중 오류가 발생했습니다")
            raise

    def encode(self, instance: Instance, five_clause: bool = False) -> bytes:
        try:
            return write_dimacs(encode_instance(instance, five_clause_1in3=five_clause))
        except Exception:
            logger.exception("CNF 변환 중 오류가 발생했습니다")
            raise

    def solve(self, problem: Instance | CnfFormula, node_budget: int) -> SolveOutcome:
        """인스턴스 또는 CNF 식의 해 개수 구간을 판정합니다."""
        try:
            if isinstance(problem, Instance):
                return solve_instance(problem, node_budget)
            return dpll_count_upto2(problem, node_budget)
        except Exception:
            logger.exception("해 개수 판정 중 오류가 발생했습니다")
            raise

    def walksat(self, formula: CnfFormula, params: WalkSatParams, instance_id: str = "") -> RunRecord:
        try:
            return walksat_run(formula, params, generator_from_seed(params.seed), instance_id=instance_id)
        except Exception:
            logger.exception("WalkSAT 실행 중 오류가 발생했습니다")
            raise

    def study(self, config: StudyConfig) -> StudyResult:
        """스케일링 연구를 실행하고 결과 파일을 저장합니다.

        Args:
            config: 연구 설정

        Returns:
            StudyResult
        """
        try:
            service = ScalingStudyService(CsvStudyRepository(config.output_dir))
            result = service.run_scaling_study(config)
            logger.info(
                "스케일링 연구를 마쳤습니다",
                extra={"family": config.family.value, "output_dir": str(config.output_dir)},
            )
            return result
        except Exception:
            logger.exception("스케일링 연구 중 오류가 발생했습니다")
            raise

    def usa_curve(
        self,
        family: ModelFamily,
        sizes: Sequence[int],
        trials: int,
        seed: int,
        rejection_budget: int,
        node_budget: int,
        output_dir: Path,
    ) -> list[UsaCurvePoint]:
        try:
            service = ScalingStudyService(CsvStudyRepository(output_dir))
            return service.run_usa_curve(family, sizes, trials, seed, rejection_budget, node_budget)
        except Exception:
            logger.exception("USA 확률 측정 중 오류가 발생했습니다")
            raise

    def fit(self, rows: Sequence[dict[str, str]], window: Sequence[int] | None = None) -> ScalingFit:
        try:
            return fit_summary_rows(rows, window)
        except Exception:
            logger.exception("지수 피팅 중 오류가 발생했습니다")
            raise
