"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class CommtrackError(Exception):
    exit_code = 1


class ConfigError(CommtrackError, ValueError):
    exit_code = 2


class DataError(CommtrackError, ValueError):
    exit_code = 3


class DegenerateFitError(CommtrackError, ValueError):
    exit_code = 4
