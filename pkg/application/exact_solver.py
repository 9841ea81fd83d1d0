import logging
import numpy as np
from application.cnf_encoder import encode_instance
from domain.entities.cnf_formula import CnfFormula
from domain.entities.instance import Instance
from domain.entities.solver_results import Assignment, Gf2Solution, Gf2System, SolveOutcome
from domain.exceptions import SizeLimitError
from domain.value_objects.types import DEFAULT_DPLL_NODE_BUDGET, CountClass


logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_VARS = 26
_CHUNK_BITS = 16


class DpllCounter:
    """단위 전파를 쓰는 DPLL 로 해를 2개까지 셉니다.

    순수 리터럴 제거는 해를 숨길 수 있어 사용하지 않습니다. 분기 변수는
    가장 짧은 미충족 절에 가장 많이 등장하는 변수(MOMS)이며, 동률이면
    인덱스가 작은 변수를 고릅니다. 값은 0을 먼저 시도합니다.

    Attributes:
        nodes: 지금까지 만든 분기 노드 수
    """

    def __init__(self, formula: CnfFormula, node_budget: int = DEFAULT_DPLL_NODE_BUDGET):
        """카운터를 초기화합니다.

        Args:
            formula: 판정할 CNF 식
            node_budget: 분기 노드 상한
        """
        self._n_vars = formula.n_vars
        self._clauses = [tuple(dict.fromkeys(clause)) for clause in formula.literal_codes()]
        self._occurrences: list[list[int]] = [[] for _ in range(2 * formula.n_vars)]
        for index, clause in enumerate(self._clauses):
            for lit in clause:
                self._occurrences[lit].append(index)
        self._node_budget = node_budget
        self._value = [-1] * formula.n_vars
        self._trail: list[int] = []
        self._models: list[Assignment] = []
        self.nodes = 0

    def count(self) -> SolveOutcome:
        """해 개수 구간을 판정합니다.

        Returns:
            SolveOutcome (예산 초과 시 BUDGET_EXCEEDED)
        """
        if not self._propagate_units():
            return SolveOutcome(CountClass.ZERO)

        stack: list[list[int]] = []
        while True:
            var = self._select_branch_variable()
            if var is None:
                self._record_models()
                if len(self._models) >= 2 or not self._backtrack(stack):
                    break
                continue
            if self.nodes >= self._node_budget:
                return SolveOutcome(CountClass.BUDGET_EXCEEDED, nodes=self.nodes)
            self.nodes += 1
            stack.append([var, len(self._trail), 0])
            if not self._decide(var, 0) and not self._backtrack(stack):
                break
        return self._outcome()

    def _is_false(self, lit: int) -> bool:
        return self._value[lit >> 1] == (lit & 1)

    def _assign(self, lit: int) -> None:
        var = lit >> 1
        self._value[var] = 1 - (lit & 1)
        self._trail.append(var)

    def _propagate_units(self) -> bool:
        queue = []
        for clause in self._clauses:
            if len(clause) != 1:
                continue
            lit = clause[0]
            if self._is_false(lit):
                return False
            if self._value[lit >> 1] == -1:
                self._assign(lit)
                queue.append(lit)
        return self._propagate(queue)

    def _propagate(self, queue: list[int]) -> bool:
        value = self._value
        head = 0
        while head < len(queue):
            lit = queue[head]
            head += 1
            for index in self._occurrences[lit ^ 1]:
                free_count = 0
                free_lit = -1
                satisfied = False
                for other in self._clauses[index]:
                    v = value[other >> 1]
                    if v == -1:
                        free_count += 1
                        free_lit = other
                    elif v != (other & 1):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if free_count == 0:
                    return False
                if free_count == 1:
                    self._assign(free_lit)
                    queue.append(free_lit)
        return True

    def _select_branch_variable(self) -> int | None:
        value = self._value
        best_size = len(value) + 1
        counts: dict[int, int] = {}
        for clause in self._clauses:
            free = []
            for lit in clause:
                v = value[lit >> 1]
                if v == -1:
                    free.append(lit >> 1)
                elif v != (lit & 1):
                    break
            else:
                if len(free) < best_size:
                    best_size = len(free)
                    counts = {}
                if len(free) == best_size:
                    for var in free:
                        counts[var] = counts.get(var, 0) + 1
        if not counts:
            return None
        return min(counts, key=lambda var: (-counts[var], var))

    def _decide(self, var: int, bit: int) -> bool:
        lit = 2 * var + (1 - bit)
        self._assign(lit)
        return self._propagate([lit])

    def _undo(self, mark: int) -> None:
        while len(self._trail) > mark:
            self._value[self._trail.pop()] = -1

    def _backtrack(self, stack: list[list[int]]) -> bool:
        # 아직 1을 시도하지 않은 가장 깊은 분기로 돌아갑니다
        while stack:
            frame = stack[-1]
            var, mark, tried = frame
            self._undo(mark)
            if tried == 0:
                frame[2] = 1
                if self._decide(var, 1):
                    return True
            else:
                stack.pop()
        return False

    def _record_models(self) -> None:
        base = [max(v, 0) for v in self._value]
        self._models.append(tuple(base))
        free = [var for var, v in enumerate(self._value) if v == -1]
        if free and len(self._models) < 2:
            base[free[0]] = 1
            self._models.append(tuple(base))

    def _outcome(self) -> SolveOutcome:
        if not self._models:
            return SolveOutcome(CountClass.ZERO, nodes=self.nodes)
        if len(self._models) == 1:
            return SolveOutcome(CountClass.ONE, witness=self._models[0], nodes=self.nodes)
        return SolveOutcome(
            CountClass.TWO_OR_MORE,
            witness=self._models[0],
            second_witness=self._models[1],
            nodes=self.nodes,
        )


def dpll_count_upto2(formula: CnfFormula, node_budget: int = DEFAULT_DPLL_NODE_BUDGET) -> SolveOutcome:
    """DPLL 로 해 개수 구간(0, 1, 2 이상)을 판정합니다.

    Args:
        formula: CNF 식
        node_budget: 분기 노드 상한

    Returns:
        SolveOutcome
    """
    return DpllCounter(formula, node_budget).count()


def _eliminate(system: Gf2System) -> tuple[list[int], list[int], bool]:
    """첨가 행렬을 기약 행사다리꼴로 만듭니다.

    Returns:
        (피벗 행 목록, 피벗 열 목록, 모순 없음 여부)
    """
    n = system.n_vars
    rows = [row | (rhs << n) for row, rhs in zip(system.rows, system.rhs)]
    pivot_cols: list[int] = []
    rank = 0
    for col in range(n):
        bit = 1 << col
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pivot_row = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & bit:
                rows[i] ^= pivot_row
        pivot_cols.append(col)
        rank += 1
        if rank == len(rows):
            break
    contradiction = 1 << n
    consistent = all(row != contradiction for row in rows[rank:])
    return rows[:rank], pivot_cols, consistent


def _back_substitute(rows: list[int], pivot_cols: list[int], n_vars: int, free_ones: frozenset[int]) -> Assignment:
    assignment = [1 if var in free_ones else 0 for var in range(n_vars)]
    for row, col in zip(rows, pivot_cols):
        bit = (row >> n_vars) & 1
        for var in free_ones:
            if (row >> var) & 1:
                bit ^= 1
        assignment[col] = bit
    return tuple(assignment)


def gf2_solve(system: Gf2System) -> Gf2Solution:
    """GF(2) 가우스 소거로 랭크, 무모순성, 해 하나를 구합니다.

    행은 정수 비트셋이며 열은 왼쪽(변수 0)부터 소거합니다. 해는 자유
    변수를 0으로 두고 역대입합니다.

    Args:
        system: 선형 시스템

    Returns:
        Gf2Solution (해 개수 = 2^(N - rank))
    """
    rows, pivot_cols, consistent = _eliminate(system)
    witness = _back_substitute(rows, pivot_cols, system.n_vars, frozenset()) if consistent else None
    return Gf2Solution(rank=len(rows), consistent=consistent, witness=witness, n_vars=system.n_vars)


def solve_instance(instance: Instance, node_budget: int = DEFAULT_DPLL_NODE_BUDGET) -> SolveOutcome:
    """네이티브 인스턴스의 해 개수 구간을 판정합니다.

    XORSAT 계열은 가우스 소거를, 나머지는 CNF 변환 후 DPLL 을 사용합니다.

    Args:
        instance: 판정할 인스턴스
        node_budget: DPLL 노드 상한

    Returns:
        SolveOutcome
    """
    if not instance.family.is_xorsat:
        return dpll_count_upto2(encode_instance(instance), node_budget)

    system = Gf2System.from_instance(instance)
    rows, pivot_cols, consistent = _eliminate(system)
    if not consistent:
        return SolveOutcome(CountClass.ZERO)
    witness = _back_substitute(rows, pivot_cols, system.n_vars, frozenset())
    free = sorted(set(range(system.n_vars)) - set(pivot_cols))
    if not free:
        return SolveOutcome(CountClass.ONE, witness=witness)
    second = _back_substitute(rows, pivot_cols, system.n_vars, frozenset(free[:1]))
    return SolveOutcome(CountClass.TWO_OR_MORE, witness=witness, second_witness=second)


def _satisfying_mask(clauses: list[tuple[int, ...]], n_vars: int, start: int, stop: int) -> np.ndarray:
    indices = np.arange(start, stop, dtype=np.int64)
    bits = ((indices[:, None] >> np.arange(n_vars, dtype=np.int64)) & 1).astype(bool)
    mask = np.ones(indices.size, dtype=bool)
    for clause in clauses:
        satisfied = np.zeros(indices.size, dtype=bool)
        for lit in clause:
            column = bits[:, lit >> 1]
            satisfied |= ~column if lit & 1 else column
        mask &= satisfied
    return mask


def _check_size(formula: CnfFormula) -> None:
    if formula.n_vars > MAX_BRUTE_FORCE_VARS:
        raise SizeLimitError(f"전수 열거는 변수 {MAX_BRUTE_FORCE_VARS}개까지만 허용됩니다 (요청 {formula.n_vars})")


def _chunks(n_vars: int):
    total = 1 << n_vars
    step = 1 << _CHUNK_BITS
    for start in range(0, total, step):
        yield start, min(start + step, total)


def brute_force_count(formula: CnfFormula, cap: int) -> int:
    """모든 할당을 열거해 해 개수를 cap 까지 셉니다 (테스트 오라클).

    Args:
        formula: CNF 식 (변수 26개 이하)
        cap: 세는 상한

    Returns:
        min(실제 해 개수, cap)

    Raises:
        SizeLimitError: 변수가 너무 많은 경우
    """
    _check_size(formula)
    clauses = formula.literal_codes()
    count = 0
    for start, stop in _chunks(formula.n_vars):
        count += int(_satisfying_mask(clauses, formula.n_vars, start, stop).sum())
        if count >= cap:
            return cap
    return count


def brute_force_solutions(formula: CnfFormula, limit: int | None = None) -> list[Assignment]:
    """모든 할당을 열거해 만족 할당 목록을 반환합니다.

    Args:
        formula: CNF 식 (변수 26개 이하)
        limit: 반환할 최대 개수 (None 이면 전부)

    Returns:
        사전식(변수 0이 최하위 비트) 순서의 만족 할당 목록

    Raises:
        SizeLimitError: 변수가 너무 많은 경우
    """
    _check_size(formula)
    clauses = formula.literal_codes()
    solutions: list[Assignment] = []
    for start, stop in _chunks(formula.n_vars):
        for index in np.flatnonzero(_satisfying_mask(clauses, formula.n_vars, start, stop)).tolist():
            value = start + index
            solutions.append(tuple((value >> var) & 1 for var in range(formula.n_vars)))
            if limit is not None and len(solutions) >= limit:
                return solutions
    return solutions
