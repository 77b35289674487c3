"""Exception types raised across the pipeline."""


class ConXsenseError(Exception):
    """Base class for all package errors."""


class MalformedRecord(ConXsenseError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyTrace(ConXsenseError):
    pass


class BothEmpty(ConXsenseError, ValueError):
    pass


class EmptyMembers(ConXsenseError, ValueError):
    pass


class NoFeedback(ConXsenseError):
    pass


class InsufficientData(ConXsenseError):
    def __init__(self, label: str, needed: int, have: int = 0):
        super().__init__(f"class {label!r} needs at least {needed} examples, got {have}")
        self.label = label
        self.needed = needed
        self.have = have


class TooFewExamples(ConXsenseError):
    pass


class OneClassOnly(ConXsenseError, ValueError):
    pass


class UnknownSensor(ConXsenseError, KeyError):
    pass


class InvalidSchedule(ConXsenseError, ValueError):
    pass
