"""네이티브 인스턴스 텍스트 형식.

한 스트림에 인스턴스가 여러 개 올 수 있으며 각 인스턴스는 머리 줄로
시작합니다::

    p native <family> <n_vars> <n_clauses>
    c <kind> <var...> [parity]
    s <bitstring>

변수 번호는 0부터 시작합니다. 패리티는 XOR 절에만 쓰며 ``s`` 줄은
알려진 해가 있을 때만 씁니다. ``#`` 로 시작하는 줄은 무시합니다.
"""
import logging
from collections.abc import Iterable
from pathlib import Path
from typing import TextIO
from domain.entities.instance import Instance, NativeClause
from domain.exceptions import NativeFormatError
from domain.repositories.instance_repository import InstanceRepository
from domain.value_objects.types import ClauseKind, ModelFamily


logger = logging.getLogger(__name__)


def format_instance(instance: Instance) -> str:
    lines = [f"p native {instance.family.value} {instance.n_vars} {instance.n_clauses}"]
    for clause in instance.clauses:
        fields = ["c", clause.kind.value, *(str(v) for v in clause.vars)]
        if clause.kind is ClauseKind.XOR_PARITY:
            fields.append(str(clause.parity))
        lines.append(" ".join(fields))
    if instance.known_solution is not None:
        lines.append("s " + "".join(str(bit) for bit in instance.known_solution))
    return "\n".join(lines) + "\n"


def format_instances(instances: Iterable[Instance]) -> str:
    return "".join(format_instance(instance) for instance in instances)


class _PendingInstance:
    def __init__(self, family: ModelFamily, n_vars: int, n_clauses: int, line_number: int):
        self.family = family
        self.n_vars = n_vars
        self.n_clauses = n_clauses
        self.line_number = line_number
        self.clauses: list[NativeClause] = []
        self.solution: tuple[int, ...] | None = None

    def build(self, line_number: int) -> Instance:
        if len(self.clauses) != self.n_clauses:
            raise NativeFormatError(
                f"절 개수 {len(self.clauses)}가 머리 줄의 {self.n_clauses}와 다릅니다", line_number
            )
        try:
            return Instance(
                n_vars=self.n_vars,
                clauses=tuple(self.clauses),
                family=self.family,
                known_solution=self.solution,
            )
        except ValueError as error:
            raise NativeFormatError(str(error), self.line_number) from error


def _parse_header(fields: list[str], line_number: int) -> _PendingInstance:
    if len(fields) != 5 or fields[1] != "native":
        raise NativeFormatError("머리 줄은 'p native <family> <n_vars> <n_clauses>' 형식이어야 합니다", line_number)
    try:
        family = ModelFamily(fields[2])
    except ValueError:
        raise NativeFormatError(f"알 수 없는 모델 계열입니다: {fields[2]}", line_number) from None
    try:
        n_vars, n_clauses = int(fields[3]), int(fields[4])
    except ValueError:
        raise NativeFormatError("머리 줄의 개수가 정수가 아닙니다", line_number) from None
    return _PendingInstance(family, n_vars, n_clauses, line_number)


def _parse_clause(fields: list[str], line_number: int, n_vars: int) -> NativeClause:
    try:
        kind = ClauseKind(fields[1])
    except (IndexError, ValueError):
        raise NativeFormatError("알 수 없는 절 종류입니다", line_number) from None
    try:
        numbers = [int(token) for token in fields[2:]]
    except ValueError:
        raise NativeFormatError("절의 변수 번호가 정수가 아닙니다", line_number) from None
    expected = kind.arity + (1 if kind is ClauseKind.XOR_PARITY else 0)
    if len(numbers) != expected:
        raise NativeFormatError(f"{kind.value} 절에는 값이 {expected}개 필요합니다", line_number)
    variables = tuple(numbers[: kind.arity])
    if any(not 0 <= v < n_vars for v in variables):
        raise NativeFormatError(f"변수 번호가 범위 0..{n_vars - 1}를 벗어났습니다", line_number)
    parity = numbers[kind.arity] if kind is ClauseKind.XOR_PARITY else 0
    try:
        return NativeClause(variables, kind, parity)
    except ValueError as error:
        raise NativeFormatError(str(error), line_number) from error


def parse_instances(text: str) -> list[Instance]:
    """네이티브 형식 텍스트에서 인스턴스를 모두 읽습니다.

    Args:
        text: 네이티브 형식 내용

    Returns:
        등장 순서대로의 인스턴스 목록

    Raises:
        NativeFormatError: 형식 오류 (줄 번호 포함)
    """
    instances: list[Instance] = []
    pending: _PendingInstance | None = None
    line_number = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag = fields[0]
        if tag == "p":
            if pending is not None:
                instances.append(pending.build(line_number))
            pending = _parse_header(fields, line_number)
        elif pending is None:
            raise NativeFormatError("머리 줄보다 먼저 내용이 나왔습니다", line_number)
        elif tag == "c":
            pending.clauses.append(_parse_clause(fields, line_number, pending.n_vars))
        elif tag == "s":
            bits = fields[1] if len(fields) == 2 else ""
            if len(bits) != pending.n_vars or set(bits) - {"0", "1"}:
                raise NativeFormatError("해 줄은 길이 n_vars 의 0/1 문자열이어야 합니다", line_number)
            pending.solution = tuple(int(bit) for bit in bits)
        else:
            raise NativeFormatError(f"알 수 없는 줄 종류입니다: '{tag}'", line_number)
    if pending is not None:
        instances.append(pending.build(line_number))
    return instances


class FileInstanceRepository(InstanceRepository):
    """네이티브 형식 파일 하나에 인스턴스를 저장하는 저장소입니다.

    Attributes:
        path: 인스턴스 파일 경로
    """

    def __init__(self, path: Path):
        self.path = path

    def save_instances(self, instances: list[Instance]) -> None:
        """인스턴스를 파일에 씁니다 (기존 내용은 덮어씀)."""
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(format_instances(instances), encoding="utf-8")
        logger.info("인스턴스를 저장했습니다", extra={"path": str(self.path), "count": len(instances)})

    def load_instances(self) -> list[Instance]:
        return parse_instances(self.path.read_text(encoding="utf-8"))


class StreamInstanceRepository(InstanceRepository):
    """표준 입출력 같은 텍스트 스트림에 인스턴스를 읽고 쓰는 저장소입니다."""

    def __init__(self, stream: TextIO):
        self.stream = stream

    def save_instances(self, instances: list[Instance]) -> None:
        self.stream.write(format_instances(instances))
        self.stream.flush()

    def load_instances(self) -> list[Instance]:
        return parse_instances(self.stream.read())
