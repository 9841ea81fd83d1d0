from dataclasses import dataclass, field
from collections.abc import Sequence
from domain.value_objects.types import ClauseKind, ModelFamily


@dataclass(frozen=True, slots=True)
class NativeClause:
    """CNF 변환 전의 점유/패리티 절입니다.

    Attributes:
        vars: 절에 속한 변수 인덱스 (서로 다름)
        kind: 절 종류
        parity: XOR 절의 목표 합 (mod 2), 다른 종류는 0
    """
    vars: tuple[int, ...]
    kind: ClauseKind
    parity: int = 0

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if len(self.vars) != self.kind.arity:
            raise ValueError(f"{self.kind.value} 절은 변수 {self.kind.arity}개가 필요합니다")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"절의 변수가 중복되었습니다: {self.vars}")
        if self.parity not in (0, 1):
            raise ValueError("패리티는 0 또는 1이어야 합니다")
        if self.parity and self.kind is not ClauseKind.XOR_PARITY:
            raise ValueError("패리티는 XOR 절에만 지정할 수 있습니다")

    def is_satisfied_by(self, assignment: Sequence[int]) -> bool:
        weight = sum(assignment[v] for v in self.vars)
        if self.kind is ClauseKind.EXACTLY_1_OF_3:
            return weight == 1
        if self.kind is ClauseKind.EXACTLY_2_OF_4:
            return weight == 2
        return weight % 2 == self.parity


@dataclass(slots=True)
class Instance:
    """네이티브 제약 충족 인스턴스입니다.

    known_solution 은 USA 필터가 유일해를 찾으면 채워지므로 이 엔티티는
    변경 가능하게 둡니다.

    Attributes:
        n_vars: 변수 개수
        clauses: 절 목록
        family: 모델 계열
        known_solution: 알려진 만족 할당 (없으면 None)
    """
    n_vars: int
    clauses: tuple[NativeClause, ...]
    family: ModelFamily
    known_solution: tuple[int, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if self.n_vars < 0:
            raise ValueError("변수 개수는 음수일 수 없습니다")
        self.clauses = tuple(self.clauses)
        expected_kind = self.family.clause_kind
        for clause in self.clauses:
            if clause.kind is not expected_kind:
                raise ValueError(f"{self.family.value} 인스턴스에 {clause.kind.value} 절이 포함되었습니다")
            if any(v < 0 or v >= self.n_vars for v in clause.vars):
                raise ValueError(f"변수 인덱스가 범위를 벗어났습니다: {clause.vars}")
        if self.family.is_locked and self.clauses and min(self.degrees()) < 2:
            raise ValueError("locked 인스턴스의 모든 변수는 두 개 이상의 절에 속해야 합니다")
        if self.known_solution is not None:
            self.attach_solution(self.known_solution)

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def degrees(self) -> list[int]:
        """변수별 차수(속한 절의 개수)를 계산합니다.

        Returns:
            길이 n_vars 의 차수 목록
        """
        counts = [0] * self.n_vars
        for clause in self.clauses:
            for v in clause.vars:
                counts[v] += 1
        return counts

    def violated_clauses(self, assignment: Sequence[int]) -> list[int]:
        """할당이 위반하는 절의 인덱스를 반환합니다.

        Args:
            assignment: 길이 n_vars 의 0/1 할당

        Returns:
            위반된 절 인덱스 목록

        Raises:
            ValueError: 할당 길이가 맞지 않는 경우
        """
        if len(assignment) != self.n_vars:
            raise ValueError(f"할당 길이 {len(assignment)}가 변수 개수 {self.n_vars}와 다릅니다")
        return [i for i, clause in enumerate(self.clauses) if not clause.is_satisfied_by(assignment)]

    def is_satisfied_by(self, assignment: Sequence[int]) -> bool:
        return not self.violated_clauses(assignment)

    def attach_solution(self, solution: Sequence[int]) -> None:
        """검증된 만족 할당을 known_solution 으로 저장합니다.

        Args:
            solution: 0/1 할당

        Raises:
            ValueError: 할당이 인스턴스를 만족하지 않는 경우
        """
        solution = tuple(int(bit) for bit in solution)
        if any(bit not in (0, 1) for bit in solution):
            raise ValueError("할당은 0과 1로만 구성되어야 합니다")
        if not self.is_satisfied_by(solution):
            raise ValueError("known_solution 이 인스턴스를 만족하지 않습니다")
        self.known_solution = solution


@dataclass(frozen=True, slots=True)
class DegreeSequence:
    """configuration model 에 사용할 변수 차수열입니다.

    Attributes:
        degrees: 변수별 차수
        target_sum: 차수 합의 목표값 (= K·M)
    """
    degrees: tuple[int, ...]
    target_sum: int

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if any(d < 0 for d in self.degrees):
            raise ValueError("차수는 음수일 수 없습니다")
        if sum(self.degrees) != self.target_sum:
            raise ValueError(f"차수 합 {sum(self.degrees)}이 목표 {self.target_sum}과 다릅니다")

    @property
    def min_degree(self) -> int:
        return min(self.degrees) if self.degrees else 0
