import logging
import sys
from interface.cli.dispatcher import ExitCode, dispatch, report_error
from interface.cli.parser import UsageError, parse_command


LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
logger = logging.getLogger(__name__)


def main(argv: list[str] | None = None) -> int:
    """USA 벤치마크 CLI 를 실행합니다.

    Args:
        argv: 프로그램 이름을 뺀 인자 목록 (None 이면 sys.argv)

    Returns:
        프로세스 종료 코드
    """
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_command(argv)
    except UsageError as error:
        # 파싱 전이므로 인자 목록에서 직접 확인합니다
        report_error(error, "--json-errors" in argv)
        return int(ExitCode.USAGE)

    logging.basicConfig(level=getattr(logging, config.log_level), format=LOG_FORMAT)
    logger.debug("명령을 실행합니다", extra={"subcommand": config.subcommand})
    return dispatch(config)


if __name__ == "__main__":
    sys.exit(main())
