import enum as __enum__
import sys as __sys__


class LoggingLevels(__enum__.Enum):
    """
    Enumeration of mock logger logging levels.

    Supported levels are:
        DEBUG

        INFO

        WARNING

        ERROR

        CRITICAL
    """

    DEBUG = 0
    INFO = 1
    WARNING = 2
    ERROR = 3
    CRITICAL = 4


def set_mock_logging_level(level: LoggingLevels):
    """
    Set the mock logger to a different logging level.

    :param level: (bis_rating_bench.LoggingLevels): Enumeration value for level.
    :return: None
    """
    MockLogger.set_logging_level(level)


class MockLogger:
    """
    Stand-in for a logging.Logger, used by every function called without a logger.

    Messages at or above the process-wide level are printed as ``LEVEL: message``.
    Debug and info go to stdout, warnings and errors to stderr. ``%``-style
    arguments are interpolated like the logging module does.
    """

    __logging_level__: int = LoggingLevels.INFO.value

    @classmethod
    def set_logging_level(cls, level: LoggingLevels):
        cls.__logging_level__ = level.value

    @classmethod
    def get_logging_level(cls) -> LoggingLevels:
        return LoggingLevels(cls.__logging_level__)

    def __emit__(self, level: LoggingLevels, message: str, args: tuple):
        if MockLogger.__logging_level__ > level.value:
            return
        text: str = str(message) % args if args else str(message)
        stream = __sys__.stdout if level.value < LoggingLevels.WARNING.value else __sys__.stderr
        print("{level}: {message}".format(level=level.name, message=text), file=stream)

    def debug(self, message: str, *args):
        self.__emit__(LoggingLevels.DEBUG, message, args)

    def info(self, message: str, *args):
        self.__emit__(LoggingLevels.INFO, message, args)

    def warning(self, message: str, *args):
        self.__emit__(LoggingLevels.WARNING, message, args)

    def error(self, message: str, *args):
        self.__emit__(LoggingLevels.ERROR, message, args)

    def critical(self, message: str, *args):
        self.__emit__(LoggingLevels.CRITICAL, message, args)
