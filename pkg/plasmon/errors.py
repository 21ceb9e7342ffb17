from __future__ import annotations


class PlasmonError(Exception):
    """Radice di tutti gli errori del pacchetto."""


def _with_value(msg: str, value) -> str:
    return msg if value is None else f"{msg} (value={value})"


class _ValueFlavoured(PlasmonError, ValueError):
    def __init__(self, msg: str, value=None):
        super().__init__(_with_value(msg, value))
        self.value = value


class _RuntimeFlavoured(PlasmonError, RuntimeError):
    def __init__(self, msg: str, value=None):
        super().__init__(_with_value(msg, value))
        self.value = value


# specfun
class DegenerateArgument(_ValueFlavoured):
    pass


class OrderOverflow(_ValueFlavoured):
    pass


# harmonics
class DegenerateIndex(_ValueFlavoured):
    pass


class NotTangential(_ValueFlavoured):
    pass


class TruncationWarning(UserWarning):
    pass


# spectrum
class AdmissibilityViolation(_RuntimeFlavoured):
    pass


class DegenerateEigenpair(_RuntimeFlavoured):
    pass


# scattering
class TooCloseToSurface(_ValueFlavoured):
    pass


class TraceOnlySource(_ValueFlavoured):
    pass


class DefectiveMode(_RuntimeFlavoured):
    pass


class NearSingularMode(_RuntimeFlavoured):
    def __init__(self, msg: str, mode=None, value=None):
        super().__init__(msg if mode is None else f"{msg} mode={mode}", value)
        self.mode = mode


# design
class NearPole(_ValueFlavoured):
    pass


class Unreachable(_ValueFlavoured):
    pass


# oracle
class ExtrapolationUnstable(_RuntimeFlavoured):
    pass


class LeakageExcessive(_RuntimeFlavoured):
    pass


# cli / config
class ConfigError(PlasmonError, ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


class InadmissibleConfig(_ValueFlavoured):
    pass
