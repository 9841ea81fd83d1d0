import math
from dataclasses import dataclass
from domain.value_objects.types import (
    DEFAULT_MAX_FLIPS,
    DEFAULT_MAX_TRIES,
    DEFAULT_NOISE,
    DEFAULT_TOTAL_FLIP_BUDGET,
)

SEED_LIMIT = 1 << 64


@dataclass(frozen=True, slots=True)
class WalkSatParams:
    """WalkSAT 실행 파라미터입니다.

    Attributes:
        noise: 무작위 변수를 뒤집을 확률 p
        max_flips: 재시작 전 시도당 최대 플립 수
        max_tries: 최대 시도(재시작) 수
        seed: 64비트 난수 시드
        total_flip_budget: 모든 시도에 걸친 전역 플립 상한
    """
    noise: float = DEFAULT_NOISE
    max_flips: int = DEFAULT_MAX_FLIPS
    max_tries: int = DEFAULT_MAX_TRIES
    seed: int = 0
    total_flip_budget: int = DEFAULT_TOTAL_FLIP_BUDGET

    def __post_init__(self) -> None:
        """생성 후 불변 조건을 검증합니다.

        Raises:
            ValueError: 불변 조건 위반 시
        """
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"노이즈는 0과 1 사이여야 합니다: {self.noise}")
        if self.max_flips < 1:
            raise ValueError("max_flips 는 1 이상이어야 합니다")
        if self.max_tries < 1:
            raise ValueError("max_tries 는 1 이상이어야 합니다")
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValueError("시드는 64비트 음이 아닌 정수여야 합니다")
        if self.total_flip_budget < 0:
            raise ValueError("전역 플립 예산은 음수일 수 없습니다")


@dataclass(frozen=True, slots=True)
class RunRecord:
    """WalkSAT 한 번 실행의 결과입니다.

    Attributes:
        instance_id: 인스턴스 식별자
        noise: 사용한 노이즈
        flips_to_solution: 모든 시도에 걸친 누적 플립 수 (찾지 못하면 None)
        tries: 사용한 시도 수
        wall_time: 경과 시간(초), 직렬화하지 않음
        seed: 실행 시드
    """
    instance_id: str
    noise: float
    flips_to_solution: int | None
    tries: int
    wall_time: float
    seed: int

    @property
    def solved(self) -> bool:
        return self.flips_to_solution is not None

    @property
    def cost(self) -> float:
        """정렬용 비용입니다. 해를 찾지 못한 실행은 모든 유한값보다 큽니다."""
        return math.inf if self.flips_to_solution is None else float(self.flips_to_solution)

    def to_dict(self) -> dict[str, str | int | float | bool | None]:
        """JSON 직렬화용 딕셔너리로 변환합니다.

        wall_time 은 재현성을 위해 제외합니다.

        Returns:
            실행 기록 딕셔너리
        """
        return {
            "instance_id": self.instance_id,
            "noise": self.noise,
            "flips": self.flips_to_solution,
            "tries": self.tries,
            "seed": self.seed,
            "solved": self.solved,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        return cls(
            instance_id=str(data["instance_id"]),
            noise=float(data["noise"]),
            flips_to_solution=None if data["flips"] is None else int(data["flips"]),
            tries=int(data["tries"]),
            wall_time=float(data.get("wall_time", 0.0)),
            seed=int(data["seed"]),
        )


@dataclass(frozen=True, slots=True)
class FlipStatistics:
    """인스턴스 앙상블의 플립 수 통계입니다.

    Attributes:
        median: 중앙값 (검열되면 inf 일 수 있음)
        q25: 하위 사분위수
        q75: 상위 사분위수
        solved_fraction: 해를 찾은 실행 비율
        censored: 절반 이상이 NOT_FOUND 인지 여부
        count: 기록 개수
    """
    median: float
    q25: float
    q75: float
    solved_fraction: float
    censored: bool
    count: int
