import logging
import math
import numpy as np
from scipy import optimize
from domain.entities.instance import DegreeSequence
from domain.exceptions import InfeasibleParametersError, RejectionBudgetExceeded
from domain.value_objects.types import DEFAULT_REJECTION_BUDGET


logger = logging.getLogger(__name__)

MIN_DEGREE = 2
_RATE_FLOOR = 1e-6


def truncated_poisson_mean(rate: float) -> float:
    """2 이상으로 조건화한 Poisson(rate) 의 평균을 계산합니다.

    Args:
        rate: Poisson 파라미터 lambda (> 0)

    Returns:
        E[X | X >= 2]
    """
    at_least_one = -math.expm1(-rate)
    at_least_two = at_least_one - rate * math.exp(-rate)
    return rate * at_least_one / at_least_two


def solve_truncated_poisson_rate(mean_degree: float) -> float:
    """절단 평균이 mean_degree 가 되는 lambda 를 이분법으로 구합니다.

    mean_degree 가 정확히 2이면 lambda -> 0 극한에 해당하므로 0을 반환합니다.

    Args:
        mean_degree: 목표 평균 차수 (>= 2)

    Returns:
        Poisson 파라미터 lambda

    Raises:
        InfeasibleParametersError: mean_degree < 2 인 경우
    """
    if mean_degree < MIN_DEGREE:
        raise InfeasibleParametersError(f"최소 차수 2에서는 평균 차수 {mean_degree}를 만들 수 없습니다")
    if mean_degree == MIN_DEGREE:
        return 0.0
    if truncated_poisson_mean(_RATE_FLOOR) >= mean_degree:
        return _RATE_FLOOR
    # 절단 평균은 lambda 보다 항상 크므로 [floor, mean] 이 근을 감쌉니다
    return optimize.bisect(
        lambda rate: truncated_poisson_mean(rate) - mean_degree,
        _RATE_FLOOR,
        mean_degree,
        xtol=1e-12,
    )


def draw_truncated_poisson(rate: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """2 이상으로 조건화한 Poisson 표본을 뽑습니다 (값별 기각)."""
    if rate == 0.0:
        return np.full(size, MIN_DEGREE, dtype=np.int64)
    values = rng.poisson(rate, size)
    short = values < MIN_DEGREE
    while short.any():
        values[short] = rng.poisson(rate, int(short.sum()))
        short = values < MIN_DEGREE
    return values


def sample_truncated_poisson_degrees(
    n_vars: int,
    target_sum: int,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_REJECTION_BUDGET,
) -> DegreeSequence:
    """합이 target_sum 인 절단 Poisson 차수열을 샘플링합니다.

    차수는 독립적으로 뽑고, 합이 맞지 않으면 수열 전체를 다시 뽑습니다.

    Args:
        n_vars: 변수 개수
        target_sum: 차수 합 (= K·M)
        rng: 난수 생성기
        max_attempts: 수열 전체 기각 상한

    Returns:
        DegreeSequence 인스턴스

    Raises:
        InfeasibleParametersError: target_sum < 2·n_vars 인 경우
        RejectionBudgetExceeded: 상한 안에 합을 맞추지 못한 경우
    """
    if n_vars <= 0:
        raise InfeasibleParametersError("변수 개수는 양의 정수여야 합니다")
    if target_sum < MIN_DEGREE * n_vars:
        raise InfeasibleParametersError(
            f"최소 차수 2에서는 차수 합이 {MIN_DEGREE * n_vars} 이상이어야 합니다 (요청 {target_sum})"
        )
    rate = solve_truncated_poisson_rate(target_sum / n_vars)
    for attempt in range(1, max_attempts + 1):
        degrees = draw_truncated_poisson(rate, n_vars, rng)
        if int(degrees.sum()) == target_sum:
            logger.debug("차수열을 샘플링했습니다", extra={"attempts": attempt, "rate": rate})
            return DegreeSequence(degrees=tuple(degrees.tolist()), target_sum=target_sum)
    raise RejectionBudgetExceeded(f"{max_attempts}회 안에 차수 합 {target_sum}을 맞추지 못했습니다")
