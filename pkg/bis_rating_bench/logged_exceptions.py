import logging as __logging__
from typing import Optional as __Optional__

import bis_rating_bench


def __rebuild_logged_error__(cls: type, message: str) -> "LoggedError":
    """
    Recreate a logged exception without logging it a second time.

    :param cls: (type): Exception class.
    :param message: (str): Original exception message.
    :return: (LoggedError): Rebuilt exception.
    """
    error: LoggedError = cls.__new__(cls)
    Exception.__init__(error, message)
    error.message = message
    return error


class LoggedError(Exception):
    """
    Base class for every exception of the bench. Logs its message on creation.

    :param logger: (logging.Logger): Logger for logging. A mock logger is used when None.
    :param message: (str): Exception message to display.
    """

    __description__: str = "The error is as follows"

    def __init__(self, logger: __Optional__[__logging__.Logger], message: str):
        super(LoggedError, self).__init__(message)
        if logger is None:
            logger = bis_rating_bench.library_backend.MockLogger()
        logger.error(message)
        logger.error("----------END:ERROR----------")
        self.message: str = message

    def __reduce__(self):
        # joblib workers pickle exceptions back to the parent
        return __rebuild_logged_error__, (self.__class__, self.message)

    def __str__(self) -> str:
        return "{description}: {error}".format(
            description=self.__description__, error=self.message
        )


class LoggedValueError(LoggedError, ValueError):
    """
    Configuration error, with builtin logging.
    """

    __description__ = "The error in the arguments is as follows"


class LoggedDataError(LoggedError, ValueError):
    """
    Data error, with builtin logging.
    """

    __description__ = "The error in the data is as follows"


class LoggedDimensionError(LoggedError, ValueError):
    """
    Shape mismatch between tensors or layers, with builtin logging.
    """

    __description__ = "The error in the tensor dimensions is as follows"


class LoggedLabelError(LoggedError, ValueError):
    """
    Unknown or out of range class label, with builtin logging.
    """

    __description__ = "The error in the labels is as follows"


class LoggedStateError(LoggedError, RuntimeError):
    """
    Operation called in the wrong state, with builtin logging.
    """

    __description__ = "The error in the object state is as follows"


class LoggedNumericError(LoggedError, ArithmeticError):
    """
    Non-finite values during a computation, with builtin logging.
    """

    __description__ = "The numeric error is as follows"


class LoggedParseError(LoggedError, ValueError):
    """
    Malformed input file, with builtin logging.
    """

    __description__ = "The error in the input file is as follows"


class LoggedIntegrityError(LoggedError, ValueError):
    """
    Violated uniqueness or ordering constraint, with builtin logging.
    """

    __description__ = "The integrity error is as follows"


class LoggedSplitError(LoggedError, ValueError):
    """
    Degenerate or impossible train/test allocation, with builtin logging.
    """

    __description__ = "The error in the split is as follows"


class LoggedDesignError(LoggedError, ValueError):
    """
    Statistical design that cannot be analysed, with builtin logging.
    """

    __description__ = "The error in the design is as follows"


class LoggedDegenerateTestError(LoggedError, ArithmeticError):
    """
    Hypothesis test without variance, with builtin logging.
    """

    __description__ = "The hypothesis test is degenerate"


class LoggedZeroVarianceError(LoggedError, ArithmeticError):
    """
    Analysis of variance on constant responses, with builtin logging.
    """

    __description__ = "The responses have zero variance"


class LoggedEvaluationError(LoggedError, ValueError):
    """
    Model evaluation that cannot be carried out, with builtin logging.
    """

    __description__ = "The error in the evaluation is as follows"


class LoggedPipelineError(LoggedError, RuntimeError):
    """
    Failure of one experiment allocation, carrying its context, with builtin logging.
    """

    __description__ = "The experiment pipeline failed"
