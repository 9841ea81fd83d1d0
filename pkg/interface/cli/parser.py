import argparse
import os
from pathlib import Path
from typing import Literal
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from domain.entities.run_record import SEED_LIMIT
from domain.value_objects.types import (
    DEFAULT_DPLL_NODE_BUDGET,
    DEFAULT_MAX_FLIPS,
    DEFAULT_MAX_TRIES,
    DEFAULT_NOISE,
    DEFAULT_REJECTION_BUDGET,
    DEFAULT_TOTAL_FLIP_BUDGET,
    EXACT_COVER_SIZES,
    ModelFamily,
    NoiseMode,
)

OUTPUT_DIR_ENV = "USA_BENCH_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

Subcommand = Literal["gen", "filter", "encode", "solve", "walksat", "study", "usa-curve", "fit"]

REQUIRED_OPTIONS: dict[str, tuple[str, ...]] = {
    "gen": ("family", "n"),
    "filter": ("input",),
    "encode": ("input",),
    "solve": ("input",),
    "walksat": ("input",),
    "study": ("family", "sizes"),
    "usa-curve": ("family", "sizes"),
    "fit": ("input",),
}


class UsageError(Exception):
    """명령행 인자가 잘못되었을 때 발생합니다."""


def parse_sizes(text: str, family: ModelFamily | str | None = None) -> tuple[int, ...]:
    """크기 사다리 문자열을 해석합니다.

    ``start:stop:step`` (stop 포함), 쉼표 목록, 또는 Exact Cover 계열의
    ``table1`` 을 받습니다.

    Args:
        text: 크기 사다리 문자열
        family: 모델 계열 (table1 허용 여부 판단용)

    Returns:
        크기 튜플

    Raises:
        ValueError: 형식이 잘못된 경우
    """
    text = text.strip()
    if text == "table1":
        if family not in (ModelFamily.UNLOCKED_1IN3, ModelFamily.UNLOCKED_1IN3.value):
            raise ValueError("table1 크기 사다리는 unlocked-1in3 계열에서만 사용할 수 있습니다")
        return tuple(sorted(EXACT_COVER_SIZES))
    try:
        if ":" in text:
            start, stop, step = (int(part) for part in text.split(":"))
            if step < 1:
                raise ValueError("간격은 1 이상이어야 합니다")
            sizes = tuple(range(start, stop + 1, step))
        else:
            sizes = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as error:
        raise ValueError(f"크기 사다리 형식이 잘못되었습니다: '{text}' ({error})") from None
    if not sizes or any(n < 1 for n in sizes):
        raise ValueError(f"크기 사다리가 비었거나 양수가 아닌 값이 있습니다: '{text}'")
    return sizes


class CommandConfig(BaseModel):
    """검증된 명령행 설정입니다.

    Attributes:
        subcommand: 실행할 하위 명령
        family: 모델 계열
        n: 변수 개수
        m: 절 개수 (None 이면 계열 규칙)
        sizes: 크기 사다리
        fit_window: 피팅 구간
        input: 입력 경로 ('-' 는 표준 입력)
        output: 출력 파일 경로 (없으면 표준 출력)
        output_dir: 연구 결과 디렉토리
        format: 입력 형식
    """
    model_config = ConfigDict(extra="forbid")

    subcommand: Subcommand
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    json_errors: bool = False

    family: ModelFamily | None = None
    n: int | None = Field(None, ge=1)
    m: int | None = Field(None, ge=1)
    count: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=SEED_LIMIT)
    random_parity: bool = False
    sizes: tuple[int, ...] | None = None
    fit_window: tuple[int, ...] | None = None
    per_size: int = Field(100, ge=1)
    trials: int = Field(1000, ge=1)
    index: int = Field(0, ge=0)

    noise: float = Field(DEFAULT_NOISE, ge=0.0, le=1.0)
    noise_mode: NoiseMode = NoiseMode.DEFAULT
    runs_per_probe: int = Field(11, ge=1)
    max_flips: int = Field(DEFAULT_MAX_FLIPS, ge=1)
    max_tries: int = Field(DEFAULT_MAX_TRIES, ge=1)
    total_flips: int = Field(DEFAULT_TOTAL_FLIP_BUDGET, ge=0)
    rejection_budget: int = Field(DEFAULT_REJECTION_BUDGET, ge=1)
    node_budget: int = Field(DEFAULT_DPLL_NODE_BUDGET, ge=1)
    max_candidates: int | None = Field(None, ge=1)
    workers: int = Field(1, ge=1)

    keep_all: bool = False
    gauge: bool = False
    five_clause: bool = False
    instance_id: str = ""

    input: str | None = None
    output: str | None = None
    output_dir: Path | None = None
    format: Literal["native", "dimacs", "csv", "json"] | None = None

    @model_validator(mode="before")
    @classmethod
    def _parse_ladders(cls, data):
        if not isinstance(data, dict):
            return data
        family = data.get("family")
        for key in ("sizes", "fit_window"):
            if isinstance(data.get(key), str):
                data = {**data, key: parse_sizes(data[key], family)}
        return data

    @model_validator(mode="after")
    def _check_required(self) -> "CommandConfig":
        missing = [name for name in REQUIRED_OPTIONS[self.subcommand] if getattr(self, name) is None]
        if missing:
            flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
            raise ValueError(f"{self.subcommand} 명령에 필요한 옵션이 없습니다: {flags}")
        if self.sizes is not None and any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("크기 사다리는 엄격히 증가해야 합니다")
        if self.fit_window is not None and self.sizes is not None and not set(self.fit_window) <= set(self.sizes):
            raise ValueError("피팅 구간은 크기 사다리의 부분집합이어야 합니다")
        return self

    def resolved_output_dir(self) -> Path:
        if self.output_dir is not None:
            return self.output_dir
        return Path(os.environ.get(OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))


class _UsageArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="로그 수준 (기본 WARNING)")
    common.add_argument("--json-errors", action="store_true", default=None, help="오류를 JSON 으로 표준 오류에 출력")
    return common


def _add_walksat_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--noise", type=float, help="노이즈 p (기본 0.5)")
    parser.add_argument("--max-flips", type=int, help="시도당 최대 플립 수")
    parser.add_argument("--max-tries", type=int, help="최대 시도(재시작) 수")
    parser.add_argument("--total-flips", type=int, help="전역 플립 상한")


def build_parser() -> argparse.ArgumentParser:
    """하위 명령을 모두 등록한 파서를 만듭니다."""
    common = _common_options()
    parser = _UsageArgumentParser(prog="usa-bench", description="USA 인스턴스 생성과 WalkSAT 스케일링 벤치마크")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=_UsageArgumentParser)
    family_choices = [family.value for family in ModelFamily]

    gen = subparsers.add_parser("gen", parents=[common], help="네이티브 인스턴스 생성")
    gen.add_argument("--family", choices=family_choices, help="모델 계열")
    gen.add_argument("--n", type=int, help="변수 개수 N")
    gen.add_argument("--m", type=int, help="절 개수 M (기본: 계열 규칙)")
    gen.add_argument("--count", type=int, help="생성할 인스턴스 수")
    gen.add_argument("--seed", type=int, help="기준 시드")
    gen.add_argument("--random-parity", action="store_true", default=None, help="XORSAT 패리티를 무작위로")
    gen.add_argument("--rejection-budget", type=int, help="기각 샘플링 상한")
    gen.add_argument("--output", help="출력 파일 (기본 표준 출력)")

    filt = subparsers.add_parser("filter", parents=[common], help="USA 인스턴스만 남기고 해를 기록")
    filt.add_argument("--input", help="네이티브 인스턴스 파일 ('-' 는 표준 입력)")
    filt.add_argument("--output", help="출력 파일 (기본 표준 출력)")
    filt.add_argument("--node-budget", type=int, help="DPLL 노드 상한")
    filt.add_argument("--keep-all", action="store_true", default=None, help="USA 가 아닌 인스턴스도 출력")
    filt.add_argument("--gauge", action="store_true", default=None, help="XORSAT USA 를 해가 전부 0이 되도록 게이지 변환")

    encode = subparsers.add_parser("encode", parents=[common], help="네이티브 인스턴스를 DIMACS 로 변환")
    encode.add_argument("--input", help="네이티브 인스턴스 파일 ('-' 는 표준 입력)")
    encode.add_argument("--index", type=int, help="변환할 인스턴스 번호 (기본 0)")
    encode.add_argument("--five-clause", action="store_true", default=None, help="1-in-3 절을 5절 형식으로 변환")
    encode.add_argument("--output", help="출력 파일 (기본 표준 출력)")

    solve = subparsers.add_parser("solve", parents=[common], help="해 개수 구간 판정")
    solve.add_argument("--input", help="입력 파일 ('-' 는 표준 입력)")
    solve.add_argument("--format", choices=["native", "dimacs"], help="입력 형식 (기본 native)")
    solve.add_argument("--index", type=int, help="네이티브 파일의 인스턴스 번호 (기본 0)")
    solve.add_argument("--node-budget", type=int, help="DPLL 노드 상한")

    walksat = subparsers.add_parser("walksat", parents=[common], help="WalkSAT 한 번 실행")
    walksat.add_argument("--input", help="입력 파일 ('-' 는 표준 입력)")
    walksat.add_argument("--format", choices=["native", "dimacs"], help="입력 형식 (기본 dimacs)")
    walksat.add_argument("--index", type=int, help="네이티브 파일의 인스턴스 번호 (기본 0)")
    walksat.add_argument("--seed", type=int, help="실행 시드")
    walksat.add_argument("--instance-id", help="기록에 남길 인스턴스 식별자")
    _add_walksat_options(walksat)

    study = subparsers.add_parser("study", parents=[common], help="스케일링 연구 실행")
    study.add_argument("--family", choices=family_choices, help="모델 계열")
    study.add_argument("--sizes", help="크기 사다리 (start:stop:step, 쉼표 목록, table1)")
    study.add_argument("--per-size", type=int, help="크기별 USA 인스턴스 수")
    study.add_argument("--seed", type=int, help="기준 시드")
    study.add_argument("--noise-mode", choices=[mode.value for mode in NoiseMode], help="default 또는 optimized")
    study.add_argument("--runs-per-probe", type=int, help="노이즈 탐색 지점별 실행 수")
    study.add_argument("--fit-window", help="피팅 구간 (크기 사다리 문법)")
    study.add_argument("--max-candidates", type=int, help="크기별 후보 생성 상한")
    study.add_argument("--workers", type=int, help="병렬 작업자 수")
    study.add_argument("--rejection-budget", type=int, help="기각 샘플링 상한")
    study.add_argument("--node-budget", type=int, help="DPLL 노드 상한")
    study.add_argument("--output-dir", type=Path, help=f"결과 디렉토리 (기본 ${OUTPUT_DIR_ENV} 또는 results)")
    _add_walksat_options(study)

    curve = subparsers.add_parser("usa-curve", parents=[common], help="크기별 USA 확률 측정")
    curve.add_argument("--family", choices=family_choices, help="모델 계열")
    curve.add_argument("--sizes", help="크기 사다리 (start:stop:step, 쉼표 목록, table1)")
    curve.add_argument("--trials", type=int, help="크기별 시행 횟수")
    curve.add_argument("--seed", type=int, help="기준 시드")
    curve.add_argument("--rejection-budget", type=int, help="기각 샘플링 상한")
    curve.add_argument("--node-budget", type=int, help="DPLL 노드 상한")
    curve.add_argument("--output-dir", type=Path, help=f"결과 디렉토리 (기본 ${OUTPUT_DIR_ENV} 또는 results)")

    fit = subparsers.add_parser("fit", parents=[common], help="집계 CSV 를 지수 피팅")
    fit.add_argument("--input", help="summary CSV 파일")
    fit.add_argument("--fit-window", help="피팅 구간 (크기 사다리 문법)")
    fit.add_argument("--output", help="피팅 JSON 출력 파일 (기본 표준 출력)")
    return parser


def parse_command(argv: list[str]) -> CommandConfig:
    """명령행을 해석하고 검증된 설정을 반환합니다.

    Args:
        argv: 프로그램 이름을 뺀 인자 목록

    Returns:
        CommandConfig

    Raises:
        UsageError: 인자가 잘못되었거나 필수 옵션이 빠진 경우
    """
    namespace = build_parser().parse_args(argv)
    values = {key: value for key, value in vars(namespace).items() if value is not None}
    try:
        return CommandConfig(**values)
    except ValidationError as error:
        details = "; ".join(f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}" for e in error.errors())
        raise UsageError(details) from None
