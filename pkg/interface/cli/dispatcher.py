import logging
import sys
from enum import IntEnum
from pathlib import Path
from typing import TextIO
from application.cnf_encoder import encode_instance
from domain.entities.cnf_formula import CnfFormula
from domain.entities.instance import Instance
from domain.entities.run_record import WalkSatParams
from domain.entities.study import ScalingFit, StudyConfig
from domain.exceptions import BudgetExhaustedError, FormatError
from domain.repositories.instance_repository import InstanceRepository
from domain.value_objects.types import CountClass
from infrastructure.persistence.csv_study_repository import read_summary_table
from infrastructure.persistence.dimacs import parse_dimacs
from infrastructure.persistence.native_instance_file import FileInstanceRepository, StreamInstanceRepository
from interface.cli.commands import BenchmarkCommands
from interface.cli.parser import CommandConfig, UsageError
from interface.cli.schemas import ErrorDocument, FitDocument, RunRecordDocument, SolveDocument


logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    """프로세스 종료 코드입니다."""
    OK = 0
    FAILURE = 1
    USAGE = 2
    BUDGET = 3
    IO = 4


def exit_code_for(error: BaseException) -> ExitCode:
    if isinstance(error, UsageError):
        return ExitCode.USAGE
    if isinstance(error, BudgetExhaustedError):
        return ExitCode.BUDGET
    if isinstance(error, (OSError, FormatError)):
        return ExitCode.IO
    return ExitCode.FAILURE


def error_document(error: BaseException) -> ErrorDocument:
    return ErrorDocument(
        error=type(error).__name__,
        message=str(error),
        exit_code=int(exit_code_for(error)),
        line_number=getattr(error, "line_number", None),
    )


def _bits(assignment) -> str | None:
    return None if assignment is None else "".join(str(bit) for bit in assignment)


class Dispatcher:
    """검증된 CommandConfig 를 명령 실행과 입출력으로 연결합니다.

    Attributes:
        stdin: 입력 스트림 ('-' 입력용)
        stdout: 데이터 출력 스트림
    """

    def __init__(self, stdin: TextIO | None = None, stdout: TextIO | None = None):
        self.stdin = stdin or sys.stdin
        self.stdout = stdout or sys.stdout
        self.commands = BenchmarkCommands()

    def _read_text(self, source: str) -> str:
        if source == "-":
            return self.stdin.read()
        return Path(source).read_text(encoding="utf-8")

    def _write_text(self, text: str, target: str | None) -> None:
        if target is None or target == "-":
            self.stdout.write(text)
            self.stdout.flush()
            return
        path = Path(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    def _instance_source(self, source: str) -> InstanceRepository:
        if source == "-":
            return StreamInstanceRepository(self.stdin)
        return FileInstanceRepository(Path(source))

    def _instance_target(self, target: str | None) -> InstanceRepository:
        if target is None or target == "-":
            return StreamInstanceRepository(self.stdout)
        return FileInstanceRepository(Path(target))

    def _load_instance(self, config: CommandConfig) -> Instance:
        instances = self._instance_source(config.input).load_instances()
        if config.index >= len(instances):
            raise ValueError(f"인스턴스 번호 {config.index}가 파일의 인스턴스 수 {len(instances)}를 벗어났습니다")
        return instances[config.index]

    def _load_problem(self, config: CommandConfig, default_format: str) -> Instance | CnfFormula:
        if (config.format or default_format) == "dimacs":
            return parse_dimacs(self._read_text(config.input))
        return self._load_instance(config)

    def _walksat_params(self, config: CommandConfig, seed: int) -> WalkSatParams:
        return WalkSatParams(
            noise=config.noise,
            max_flips=config.max_flips,
            max_tries=config.max_tries,
            seed=seed,
            total_flip_budget=config.total_flips,
        )

    def run(self, config: CommandConfig) -> ExitCode:
        """하위 명령을 실행합니다.

        Returns:
            종료 코드 (예산 초과로 끝난 판정과 NOT_FOUND 는 BUDGET)
        """
        handler = getattr(self, "_run_" + config.subcommand.replace("-", "_"))
        return handler(config)

    def _run_gen(self, config: CommandConfig) -> ExitCode:
        instances = self.commands.generate(
            config.family, config.n, config.m, config.count, config.seed, config.rejection_budget, config.random_parity
        )
        self._instance_target(config.output).save_instances(instances)
        return ExitCode.OK

    def _run_filter(self, config: CommandConfig) -> ExitCode:
        instances = self._instance_source(config.input).load_instances()
        kept = self.commands.filter_instances(instances, config.node_budget, config.keep_all, config.gauge)
        self._instance_target(config.output).save_instances(kept)
        return ExitCode.OK

    def _run_encode(self, config: CommandConfig) -> ExitCode:
        data = self.commands.encode(self._load_instance(config), config.five_clause)
        self._write_text(data.decode("ascii"), config.output)
        return ExitCode.OK

    def _run_solve(self, config: CommandConfig) -> ExitCode:
        outcome = self.commands.solve(self._load_problem(config, "native"), config.node_budget)
        document = SolveDocument(
            count_class=outcome.count_class.value,
            witness=_bits(outcome.witness),
            second_witness=_bits(outcome.second_witness),
            nodes=outcome.nodes,
        )
        self._write_text(document.model_dump_json() + "\n", None)
        return ExitCode.BUDGET if outcome.count_class is CountClass.BUDGET_EXCEEDED else ExitCode.OK

    def _run_walksat(self, config: CommandConfig) -> ExitCode:
        problem = self._load_problem(config, "dimacs")
        if isinstance(problem, Instance):
            problem = encode_instance(problem)
        if problem.n_clauses == 0:
            raise UsageError("절이 없는 식은 자명하게 만족되므로 WalkSAT 입력이 될 수 없습니다")
        record = self.commands.walksat(problem, self._walksat_params(config, config.seed), config.instance_id)
        document = RunRecordDocument(**record.to_dict())
        self._write_text(document.model_dump_json() + "\n", None)
        return ExitCode.OK if record.solved else ExitCode.BUDGET

    def _run_study(self, config: CommandConfig) -> ExitCode:
        study_config = StudyConfig(
            family=config.family,
            sizes=config.sizes,
            instances_per_size=config.per_size,
            base_params=self._walksat_params(config, 0),
            noise_mode=config.noise_mode,
            master_seed=config.seed,
            output_dir=config.resolved_output_dir(),
            runs_per_probe=config.runs_per_probe,
            max_candidates_per_size=config.max_candidates,
            fit_window=config.fit_window,
            workers=config.workers,
            rejection_budget=config.rejection_budget,
            dpll_node_budget=config.node_budget,
        )
        result = self.commands.study(study_config)
        if result.fit is not None:
            self._write_text(_fit_document(result.fit).model_dump_json() + "\n", None)
        return ExitCode.OK

    def _run_usa_curve(self, config: CommandConfig) -> ExitCode:
        self.commands.usa_curve(
            config.family,
            config.sizes,
            config.trials,
            config.seed,
            config.rejection_budget,
            config.node_budget,
            config.resolved_output_dir(),
        )
        return ExitCode.OK

    def _run_fit(self, config: CommandConfig) -> ExitCode:
        rows = read_summary_table(Path(config.input))
        fit = self.commands.fit(rows, config.fit_window)
        self._write_text(_fit_document(fit).model_dump_json(indent=2) + "\n", config.output)
        return ExitCode.OK


def _fit_document(fit: ScalingFit) -> FitDocument:
    return FitDocument(
        A=fit.prefactor,
        mu=fit.mu,
        stderr=fit.mu_stderr,
        window=list(fit.fit_window),
        residuals=list(fit.residuals),
        excluded=list(fit.excluded_sizes),
    )


def dispatch(config: CommandConfig, stdin: TextIO | None = None, stdout: TextIO | None = None) -> int:
    """설정대로 명령을 실행하고 종료 코드를 반환합니다.

    예외는 종료 코드로 바꾸며, --json-errors 이면 ErrorDocument 를 표준
    오류에 씁니다.

    Args:
        config: 검증된 명령 설정
        stdin: 입력 스트림
        stdout: 출력 스트림

    Returns:
        종료 코드
    """
    try:
        return int(Dispatcher(stdin, stdout).run(config))
    except Exception as error:
        report_error(error, config.json_errors)
        return int(exit_code_for(error))


def report_error(error: BaseException, json_errors: bool) -> None:
    if json_errors:
        sys.stderr.write(error_document(error).model_dump_json() + "\n")
    else:
        sys.stderr.write(f"오류: {error}\n")
