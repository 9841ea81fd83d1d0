from dataclasses import dataclass
from domain.entities.instance import Instance
from domain.value_objects.types import CountClass

Assignment = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class SolveOutcome:
    """해 개수 판정 결과입니다 (2개까지 셈).

    Attributes:
        count_class: 해 개수 구간
        witness: 첫 번째 만족 할당
        second_witness: 두 번째 만족 할당 (TWO_OR_MORE 일 때)
        nodes: 탐색한 분기 노드 수
    """
    count_class: CountClass
    witness: Assignment | None = None
    second_witness: Assignment | None = None
    nodes: int = 0

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if self.count_class is CountClass.ZERO and (self.witness is not None or self.second_witness is not None):
            raise ValueError("해가 없는 결과에는 증인이 없어야 합니다")
        if self.count_class is CountClass.ONE and (self.witness is None or self.second_witness is not None):
            raise ValueError("유일해 결과에는 증인이 정확히 하나 있어야 합니다")
        if self.count_class is CountClass.TWO_OR_MORE:
            if self.witness is None or self.second_witness is None:
                raise ValueError("복수해 결과에는 증인이 두 개 필요합니다")
            if self.witness == self.second_witness:
                raise ValueError("두 증인은 서로 달라야 합니다")

    @property
    def is_unique(self) -> bool:
        return self.count_class is CountClass.ONE


@dataclass(frozen=True, slots=True)
class Gf2System:
    """GF(2) 위의 선형 연립방정식입니다.

    각 행은 정수 비트셋으로 저장합니다 (비트 i = 변수 i 의 계수).

    Attributes:
        n_vars: 변수 개수 N
        rows: M 개의 행 비트셋
        rhs: 행별 우변 비트
    """
    n_vars: int
    rows: tuple[int, ...]
    rhs: tuple[int, ...]

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if len(self.rows) != len(self.rhs):
            raise ValueError("행 개수와 우변 개수가 다릅니다")
        if any(bit not in (0, 1) for bit in self.rhs):
            raise ValueError("우변은 0 또는 1이어야 합니다")
        limit = 1 << self.n_vars
        if any(row < 0 or row >= limit for row in self.rows):
            raise ValueError("행 비트셋이 변수 범위를 벗어났습니다")

    @classmethod
    def from_instance(cls, instance: Instance) -> "Gf2System":
        """XORSAT 인스턴스의 절-변수 결합 행렬을 만듭니다.

        Args:
            instance: XORSAT 계열 인스턴스

        Returns:
            Gf2System 인스턴스

        Raises:
            ValueError: XORSAT 계열이 아닌 경우
        """
        if not instance.family.is_xorsat:
            raise ValueError(f"{instance.family.value} 인스턴스는 GF(2) 시스템으로 변환할 수 없습니다")
        rows = []
        for clause in instance.clauses:
            row = 0
            for v in clause.vars:
                row |= 1 << v
            rows.append(row)
        return cls(
            n_vars=instance.n_vars,
            rows=tuple(rows),
            rhs=tuple(clause.parity for clause in instance.clauses),
        )


@dataclass(frozen=True, slots=True)
class Gf2Solution:
    """가우스 소거 결과입니다.

    Attributes:
        rank: 계수 행렬의 랭크
        consistent: 모순(0 = 1) 행이 없는지 여부
        witness: 자유 변수를 0으로 둔 해 (모순이면 None)
        n_vars: 변수 개수
    """
    rank: int
    consistent: bool
    witness: Assignment | None
    n_vars: int

    @property
    def solution_count(self) -> int:
        return 2 ** (self.n_vars - self.rank) if self.consistent else 0

    @property
    def count_class(self) -> CountClass:
        if not self.consistent:
            return CountClass.ZERO
        return CountClass.ONE if self.rank == self.n_vars else CountClass.TWO_OR_MORE
