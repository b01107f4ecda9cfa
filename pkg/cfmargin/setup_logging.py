import logging

import betterlogging as bl


def setup_logging(level: str | int = logging.INFO):
    """
    Configure console logging for the cfmargin CLI.

    Sets up betterlogging's colorized handler and the shared line format
    (file, line number, level, timestamp, logger name, message).

    Example:
        setup_logging('DEBUG')
    """
    log_level = logging.getLevelName(level) if isinstance(level, str) else level
    if not isinstance(log_level, int):
        log_level = logging.INFO
    bl.basic_colorized_config(level=log_level)

    logging.basicConfig(
        level=log_level,
        format='%(filename)s:%(lineno)d #%(levelname)-8s [%(asctime)s] - %(name)s - %(message)s',
    )
    logger = logging.getLogger(__name__)
    logger.debug('Logging configured at level %s', logging.getLevelName(log_level))
