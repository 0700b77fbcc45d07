import logging as __logging__
from os import path as __path__
from os import makedirs as __makedirs__

import bis_rating_bench

LOG_FORMAT: str = "%(asctime)s ||| %(levelname)s ||| %(message)s"
LOG_DATE_FORMAT: str = "%Y/%m/%d %H:%M:%S %A"

__LEVELS__: dict = {
    "DEBUG": __logging__.DEBUG,
    "INFO": __logging__.INFO,
    "WARNING": __logging__.WARNING,
    "ERROR": __logging__.ERROR,
    "CRITICAL": __logging__.CRITICAL,
}


def setup_logging(
    log_folder: str,
    unique_log_name: str,
    logging_level: str,
    echo_to_console: bool = False,
) -> __logging__.Logger:
    """
    Set up the bench logger with a standardised logging format.

    :param log_folder: (str): Folder to hold log files.
    :param unique_log_name: (str): Log file name.
    :param logging_level: (str): Level for logger, one of DEBUG, INFO, WARNING, ERROR, CRITICAL.
    :param echo_to_console: (bool): Also write records to stderr.
    :return: (logging.Logger): A fully set up logger.
    """

    level_name: str = str(logging_level).upper()
    if level_name not in __LEVELS__:
        raise bis_rating_bench.LoggedValueError(
            None,
            "logging.level must be one of {levels}, got '{level}'.".format(
                levels=sorted(__LEVELS__), level=logging_level
            ),
        )
    log_level: int = __LEVELS__[level_name]

    # Create logfile folder
    if not __path__.exists(log_folder):
        __makedirs__(log_folder)

    logfile_name: str = unique_log_name + ".log"
    logfile_path: str = __path__.normpath(__path__.join(log_folder, logfile_name))

    logger: __logging__.Logger = __logging__.getLogger("bis_rating_bench")
    logger.setLevel(log_level)
    logger.propagate = False
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = __logging__.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
    file_handler = __logging__.FileHandler(logfile_path, encoding="utf-8")
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    if echo_to_console:
        console_handler = __logging__.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger
