from __future__ import annotations


class MopoError(Exception):
    exit_code = 1


class ConfigError(MopoError, ValueError):
    exit_code = 2


class MaterialNotFoundError(ConfigError):
    pass


class DomainError(MopoError, ValueError):
    exit_code = 3


class ThresholdError(DomainError):
    pass


class NumericError(MopoError, RuntimeError):
    exit_code = 4


class NoRootError(NumericError):
    pass
