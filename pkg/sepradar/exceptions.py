class SepRadarError(Exception):
    """Base error; `detail` is what the CLI prints, `exit_code` what it returns."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidArgumentError(SepRadarError, ValueError):
    exit_code = 2


class NoTargetSignalError(SepRadarError):
    exit_code = 3


class InsufficientDataError(SepRadarError):
    exit_code = 3


class UnderdeterminedError(SepRadarError):
    exit_code = 3
