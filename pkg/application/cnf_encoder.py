from collections.abc import Callable
from itertools import combinations, product
from domain.entities.cnf_formula import Clause, CnfFormula, Literal
from domain.entities.instance import Instance, NativeClause
from domain.value_objects.types import ClauseKind


def _clause(*literals: Literal) -> Clause:
    return tuple(sorted(literals))


def _require_kind(clause: NativeClause, kind: ClauseKind) -> None:
    if clause.kind is not kind:
        raise ValueError(f"{kind.value} 인코더에 {clause.kind.value} 절이 전달되었습니다")


def encode_1in3(clause: NativeClause) -> list[Clause]:
    """1-in-3 절을 CNF 절 4개로 변환합니다.

    (a∨b∨c) ∧ (¬a∨¬b) ∧ (a∨¬b∨¬c) ∧ (¬a∨b∨¬c) 형태이며, 두 개의 3-절을
    2-절 하나로 합쳐 절 수를 줄였습니다.

    Args:
        clause: EXACTLY_1_OF_3 절

    Returns:
        CNF 절 목록

    Raises:
        ValueError: 절 종류가 다른 경우
    """
    _require_kind(clause, ClauseKind.EXACTLY_1_OF_3)
    a, b, c = clause.vars
    return [
        _clause(Literal(a), Literal(b), Literal(c)),
        _clause(Literal(a, True), Literal(b, True)),
        _clause(Literal(a), Literal(b, True), Literal(c, True)),
        _clause(Literal(a, True), Literal(b), Literal(c, True)),
    ]


def encode_1in3_five(clause: NativeClause) -> list[Clause]:
    """1-in-3 절을 금지 배치마다 하나씩, CNF 절 5개로 변환합니다."""
    _require_kind(clause, ClauseKind.EXACTLY_1_OF_3)
    return _forbid(clause.vars, lambda bits: sum(bits) != 1)


def encode_2in4(clause: NativeClause) -> list[Clause]:
    """2-in-4 절을 CNF 절 8개로 변환합니다.

    네 변수 중 세 개를 고르는 각 조합마다 (xi∨xj∨xk) 와 (¬xi∨¬xj∨¬xk) 를
    둡니다. 무게 1 이하는 양의 절을, 무게 3 이상은 음의 절을 위반합니다.

    Args:
        clause: EXACTLY_2_OF_4 절

    Returns:
        CNF 절 목록

    Raises:
        ValueError: 절 종류가 다른 경우
    """
    _require_kind(clause, ClauseKind.EXACTLY_2_OF_4)
    clauses = []
    for triple in combinations(clause.vars, 3):
        clauses.append(_clause(*(Literal(v) for v in triple)))
        clauses.append(_clause(*(Literal(v, True) for v in triple)))
    return clauses


def encode_xor3(clause: NativeClause) -> list[Clause]:
    """XOR 절을 잘못된 패리티 배치 4개를 금지하는 CNF 절 4개로 변환합니다.

    Args:
        clause: XOR_PARITY 절

    Returns:
        CNF 절 목록

    Raises:
        ValueError: 절 종류가 다른 경우
    """
    _require_kind(clause, ClauseKind.XOR_PARITY)
    return _forbid(clause.vars, lambda bits: sum(bits) % 2 != clause.parity)


def _forbid(variables: tuple[int, ...], forbidden: Callable[[tuple[int, ...]], bool]) -> list[Clause]:
    # 배치 bits 에서만 거짓이 되는 절: bit 가 1인 변수는 부정 리터럴
    return [
        _clause(*(Literal(v, bool(bit)) for v, bit in zip(variables, bits)))
        for bits in product((0, 1), repeat=len(variables))
        if forbidden(bits)
    ]


ENCODERS: dict[ClauseKind, Callable[[NativeClause], list[Clause]]] = {
    ClauseKind.EXACTLY_1_OF_3: encode_1in3,
    ClauseKind.EXACTLY_2_OF_4: encode_2in4,
    ClauseKind.XOR_PARITY: encode_xor3,
}


def encode_instance(instance: Instance, five_clause_1in3: bool = False) -> CnfFormula:
    """네이티브 인스턴스 전체를 CNF 식으로 변환합니다.

    Args:
        instance: 변환할 인스턴스
        five_clause_1in3: 1-in-3 절에 5-절 형태를 쓸지 여부

    Returns:
        만족 할당 집합이 같은 CNF 식
    """
    encoders = dict(ENCODERS)
    if five_clause_1in3:
        encoders[ClauseKind.EXACTLY_1_OF_3] = encode_1in3_five
    clauses: list[Clause] = []
    for clause in instance.clauses:
        clauses.extend(encoders[clause.kind](clause))
    return CnfFormula(n_vars=instance.n_vars, clauses=tuple(clauses), origin=instance)
