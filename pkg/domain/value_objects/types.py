from decimal import Decimal
from enum import Enum


class ModelFamily(Enum):
    """인스턴스 모델 계열을 정의하는 열거형입니다.

    Attributes:
        UNLOCKED_1IN3: Exact Cover (unlocked 1-in-3 SAT)
        LOCKED_1IN3: locked 1-in-3 SAT
        LOCKED_2IN4: locked 2-in-4 SAT
        XORSAT_3REG: 3-regular 3-XORSAT
        XORSAT_POISSON: truncated Poisson 차수의 3-XORSAT
    """
    UNLOCKED_1IN3 = "unlocked-1in3"
    LOCKED_1IN3 = "locked-1in3"
    LOCKED_2IN4 = "locked-2in4"
    XORSAT_3REG = "xorsat-3reg"
    XORSAT_POISSON = "xorsat-poisson"

    @property
    def clause_kind(self) -> "ClauseKind":
        if self is ModelFamily.LOCKED_2IN4:
            return ClauseKind.EXACTLY_2_OF_4
        if self.is_xorsat:
            return ClauseKind.XOR_PARITY
        return ClauseKind.EXACTLY_1_OF_3

    @property
    def clause_arity(self) -> int:
        return 4 if self is ModelFamily.LOCKED_2IN4 else 3

    @property
    def is_xorsat(self) -> bool:
        return self in (ModelFamily.XORSAT_3REG, ModelFamily.XORSAT_POISSON)

    @property
    def is_locked(self) -> bool:
        return self in (ModelFamily.LOCKED_1IN3, ModelFamily.LOCKED_2IN4)


class ClauseKind(Enum):
    """네이티브 절의 종류입니다."""
    EXACTLY_1_OF_3 = "1in3"
    EXACTLY_2_OF_4 = "2in4"
    XOR_PARITY = "xor"

    @property
    def arity(self) -> int:
        return 4 if self is ClauseKind.EXACTLY_2_OF_4 else 3


class CountClass(Enum):
    """완전 탐색 솔버가 판정한 해의 개수 구간입니다.

    BUDGET_EXCEEDED 는 노드 예산을 넘겨 판정을 포기했음을 뜻하며, 잘못된
    구간을 반환하는 대신 사용됩니다.
    """
    ZERO = "zero"
    ONE = "one"
    TWO_OR_MORE = "two-or-more"
    BUDGET_EXCEEDED = "budget-exceeded"


class NoiseMode(Enum):
    """스케일링 연구에서 사용하는 노이즈 설정 방식입니다."""
    DEFAULT = "default"
    OPTIMIZED = "optimized"


class CandidateVerdict(Enum):
    """앙상블 후보의 USA 판정 결과입니다.

    SKIPPED 는 예산 초과로 판정하지 못한 후보이며 시행 수에서 뺍니다.
    """
    USA = "usa"
    NOT_USA = "not-usa"
    SKIPPED = "skipped"


# Exact Cover 앙상블의 (N, M) 표
EXACT_COVER_SIZES: dict[int, int] = {
    16: 12,
    32: 23,
    64: 44,
    128: 86,
    192: 126,
    256: 166,
}

# locked 모델의 만족 가능성 임계값 alpha_s = M/N
LOCKED_THRESHOLDS: dict[ModelFamily, Decimal] = {
    ModelFamily.LOCKED_1IN3: Decimal("0.789"),
    ModelFamily.LOCKED_2IN4: Decimal("0.707"),
}

DEFAULT_NOISE = 0.5
DEFAULT_MAX_FLIPS = 10**8
DEFAULT_MAX_TRIES = 10**6
DEFAULT_TOTAL_FLIP_BUDGET = 10**10
DEFAULT_REJECTION_BUDGET = 10**6
DEFAULT_DPLL_NODE_BUDGET = 10**9
