import shutil
import tempfile
from pathlib import Path
import numpy as np
import pytest
from domain.entities.cnf_formula import CnfFormula, Literal
from domain.entities.instance import Instance, NativeClause
from domain.value_objects.types import ClauseKind, ModelFamily
from interface.cli.commands import BenchmarkCommands


@pytest.fixture
def temp_data_dir():
    """테스트용 임시 데이터 디렉토리를 생성합니다.

    Yields:
        임시 디렉토리 Path 객체
    """
    temp_dir = Path(tempfile.mkdtemp())
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng():
    """고정 시드의 numpy 생성기입니다."""
    return np.random.Generator(np.random.PCG64(20240611))


@pytest.fixture
def benchmark_commands():
    """테스트용 BenchmarkCommands 인스턴스를 생성합니다."""
    return BenchmarkCommands()


@pytest.fixture
def tiny_usa_xorsat():
    """x0+x1+x2=1, x1+x2+x3=0, x0+x2+x3=1, x0+x1+x3=0 (mod 2) 인 4변수 XORSAT 입니다.

    랭크가 4 이므로 유일해 0101 을 갖습니다.
    """
    return Instance(
        n_vars=4,
        clauses=(
            NativeClause((0, 1, 2), ClauseKind.XOR_PARITY, 1),
            NativeClause((1, 2, 3), ClauseKind.XOR_PARITY, 0),
            NativeClause((0, 2, 3), ClauseKind.XOR_PARITY, 1),
            NativeClause((0, 1, 3), ClauseKind.XOR_PARITY, 0),
        ),
        family=ModelFamily.XORSAT_POISSON,
    )


@pytest.fixture
def single_literal_formula():
    """절 (x1) 하나로 된 1변수 CNF 입니다."""
    return CnfFormula(n_vars=1, clauses=((Literal(0),),))
