"""DIMACS CNF 읽기/쓰기.

내부 변수 번호는 0부터, DIMACS 는 1부터 시작하며 변환은 이 모듈에서만
합니다. 절은 여러 줄에 걸칠 수 있고 ``0`` 으로 끝납니다.
"""
from domain.entities.cnf_formula import CnfFormula, Literal
from domain.exceptions import DimacsFormatError


def write_dimacs(formula: CnfFormula, include_comments: bool = False) -> bytes:
    """CNF 식을 DIMACS 바이트열로 씁니다.

    절과 리터럴 순서는 그대로 둡니다.

    Args:
        formula: CNF 식
        include_comments: 보존된 주석 줄을 머리 앞에 쓸지 여부

    Returns:
        ASCII 바이트열
    """
    lines = []
    if include_comments:
        lines.extend(f"c {comment}".rstrip() for comment in formula.comments)
    lines.append(f"p cnf {formula.n_vars} {formula.n_clauses}")
    for clause in formula.clauses:
        literals = " ".join(str(literal.to_dimacs()) for literal in clause)
        lines.append(f"{literals} 0")
    return ("\n".join(lines) + "\n").encode("ascii")


def _parse_header(line: str, line_number: int) -> tuple[int, int]:
    fields = line.split()
    if len(fields) != 4 or fields[0] != "p" or fields[1] != "cnf":
        raise DimacsFormatError(f"잘못된 머리 줄입니다: '{line}'", line_number)
    try:
        n_vars, n_clauses = int(fields[2]), int(fields[3])
    except ValueError:
        raise DimacsFormatError(f"머리 줄의 변수/절 개수가 정수가 아닙니다: '{line}'", line_number) from None
    if n_vars < 0 or n_clauses < 0:
        raise DimacsFormatError("머리 줄의 개수는 음수일 수 없습니다", line_number)
    return n_vars, n_clauses


def parse_dimacs(data: bytes | str, keep_comments: bool = False) -> CnfFormula:
    """DIMACS 바이트열을 CNF 식으로 읽습니다.

    Args:
        data: DIMACS 내용
        keep_comments: ``c`` 주석 줄을 식에 보존할지 여부

    Returns:
        CnfFormula

    Raises:
        DimacsFormatError: 머리 줄 누락/오류, 범위 밖 리터럴, 끝나지 않은 절,
            빈 절, 상보 리터럴, 절 개수 불일치
    """
    text = data.decode("ascii", errors="replace") if isinstance(data, bytes) else data
    header: tuple[int, int] | None = None
    comments: list[str] = []
    clauses: list[tuple[Literal, ...]] = []
    current: list[Literal] = []
    line_number = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            if keep_comments:
                comments.append(line[1:].strip())
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsFormatError("머리 줄이 두 번 나왔습니다", line_number)
            header = _parse_header(line, line_number)
            continue
        if header is None:
            raise DimacsFormatError("절보다 머리 줄이 먼저 나와야 합니다", line_number)

        n_vars = header[0]
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise DimacsFormatError(f"정수가 아닌 리터럴입니다: '{token}'", line_number) from None
            if value == 0:
                if not current:
                    raise DimacsFormatError("빈 절은 허용되지 않습니다", line_number)
                if any(~literal in current for literal in current):
                    raise DimacsFormatError("한 절에 상보 리터럴이 함께 있습니다", line_number)
                clauses.append(tuple(current))
                current = []
                continue
            if abs(value) > n_vars:
                raise DimacsFormatError(f"리터럴 {value}가 변수 범위 1..{n_vars}를 벗어났습니다", line_number)
            current.append(Literal.from_dimacs(value))

    if header is None:
        raise DimacsFormatError("머리 줄 'p cnf' 가 없습니다", line_number or None)
    if current:
        raise DimacsFormatError("마지막 절이 0으로 끝나지 않았습니다", line_number)
    if len(clauses) != header[1]:
        raise DimacsFormatError(f"절 개수 {len(clauses)}가 머리 줄의 {header[1]}와 다릅니다", line_number)
    return CnfFormula(n_vars=header[0], clauses=tuple(clauses), comments=tuple(comments))
