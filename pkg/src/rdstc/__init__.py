import inspect
import logging
import os

try:
    from rich.traceback import install

    install(show_locals=True)
except ImportError:
    pass

VERBOSE = logging.DEBUG - 5
logging.VERBOSE = VERBOSE  # type: ignore[attr-defined]

ENV_LOG_LEVEL = "RDSTC_LOG_LEVEL"

# Frames between the logger call site and Formatter.format()
_LOGGING_FRAMES = 8


def _align(out: str) -> str:
    first, *rest = out.split("]")
    level, location = first.split(" - ", 1)
    return level + " - " + location.rjust(24) + "]" + "]".join(rest)


class IndentFormatter(logging.Formatter):
    """Indents each record by the call depth of the logging site.

    The depth of the first record seen becomes the base depth, so the sweep
    driver's point-level messages sit at one space and the trial-level
    messages it triggers nest below them.
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.base_depth: int | None = None

    def format(self, record: logging.LogRecord) -> str:
        stack = inspect.stack()
        frame = stack[min(_LOGGING_FRAMES, len(stack) - 1)]
        depth = len(stack) - _LOGGING_FRAMES

        if self.base_depth is None:
            self.base_depth = depth - 1

        record.indent = " " * max(depth - self.base_depth, 1)
        record.funcName = frame.function
        out = _align(logging.Formatter.format(self, record))
        del record.indent  # pyright: ignore[reportGeneralTypeIssues]
        return out


class AlignFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return _align(logging.Formatter.format(self, record))


class CustomLogger(logging.getLoggerClass()):
    def __init__(self, name: str, level=logging.NOTSET):
        super().__init__(name, level)

        self.propagate = False

        logging.addLevelName(VERBOSE, "VERBOSE")

    def verbose(self, msg: str, *args, **kwargs) -> None:
        if self.isEnabledFor(VERBOSE):
            self._log(VERBOSE, msg, args, **kwargs)


logging.setLoggerClass(CustomLogger)


def _level_for(name: str, setting: str | None) -> str | None:
    """Resolves `RDSTC_LOG_LEVEL` for one logger.

    The setting is either a global level name or a comma separated list of
    `module=level` pairs, module names relative to the package.
    """
    if not setting:
        return None

    levels = logging.getLevelNamesMapping()
    if setting.upper() in levels:
        return setting.upper()

    for pair in setting.split(","):
        module_name, _, level = pair.partition("=")
        if f"{__name__}.{module_name.strip()}" == name:
            level = level.strip().upper()
            if level not in levels:
                raise ValueError(f"Unknown log level {level!r} in {ENV_LOG_LEVEL}")
            return level

    return None


def get_logger(name: str, *, indent: bool = False) -> CustomLogger:
    logger = logging.getLogger(name)

    log_level = _level_for(name, os.getenv(ENV_LOG_LEVEL, None))
    if log_level is not None:
        logger.setLevel(log_level)

    # Modules are imported once, but guard against duplicate handlers when a
    # caller asks for the same logger twice.
    if logger.handlers:
        return logger  # type: ignore

    if indent:
        formatter: logging.Formatter = IndentFormatter(
            "[{levelname:7} - {filename}:{lineno}] {indent}{funcName}(): {message}",
            style="{",
        )
    else:
        formatter = AlignFormatter(
            "[{levelname:7} - {filename}:{lineno}] {funcName}(): {message}",
            style="{",
        )

    handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    logger.addHandler(handler)

    return logger  # type: ignore
