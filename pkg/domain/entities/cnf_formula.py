from dataclasses import dataclass, field
from collections.abc import Sequence
from domain.entities.instance import Instance


@dataclass(frozen=True, slots=True, order=True)
class Literal:
    """CNF 절 안의 리터럴입니다 (0부터 시작하는 변수 인덱스).

    Attributes:
        var: 변수 인덱스
        negated: 부정 여부
    """
    var: int
    negated: bool = False

    def __post_init__(self) -> None:
        if self.var < 0:
            raise ValueError(f"변수 인덱스는 음수일 수 없습니다: {self.var}")

    @property
    def code(self) -> int:
        """엔진 내부에서 쓰는 정수 부호화 (2·var + negated) 입니다."""
        return 2 * self.var + int(self.negated)

    def to_dimacs(self) -> int:
        return -(self.var + 1) if self.negated else self.var + 1

    @classmethod
    def from_dimacs(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("DIMACS 리터럴은 0일 수 없습니다")
        return cls(var=abs(value) - 1, negated=value < 0)

    def is_true_under(self, assignment: Sequence[int]) -> bool:
        return bool(assignment[self.var]) != self.negated

    def __invert__(self) -> "Literal":
        return Literal(self.var, not self.negated)


Clause = tuple[Literal, ...]


@dataclass(frozen=True, slots=True)
class CnfFormula:
    """논리곱 표준형(CNF) 식입니다.

    Attributes:
        n_vars: 변수 개수
        clauses: 리터럴 튜플의 목록
        origin: 변환 원본 인스턴스 (없으면 None)
        comments: DIMACS 주석 줄 (선택적으로 보존)
    """
    n_vars: int
    clauses: tuple[Clause, ...]
    origin: Instance | None = field(default=None, compare=False, repr=False)
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if self.n_vars < 0:
            raise ValueError("변수 개수는 음수일 수 없습니다")
        for index, clause in enumerate(self.clauses):
            if not clause:
                raise ValueError(f"빈 절은 허용되지 않습니다 (절 {index})")
            polarity: dict[int, bool] = {}
            for literal in clause:
                if literal.var >= self.n_vars:
                    raise ValueError(f"리터럴 변수 {literal.var}가 범위를 벗어났습니다 (절 {index})")
                if polarity.setdefault(literal.var, literal.negated) != literal.negated:
                    raise ValueError(f"절 {index}에 상보 리터럴이 함께 있습니다")

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def literal_codes(self) -> list[tuple[int, ...]]:
        """절을 정수 부호 리터럴 튜플로 변환합니다."""
        return [tuple(literal.code for literal in clause) for clause in self.clauses]

    def is_satisfied_by(self, assignment: Sequence[int]) -> bool:
        return all(any(literal.is_true_under(assignment) for literal in clause) for clause in self.clauses)
