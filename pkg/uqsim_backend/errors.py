"""
Exceptions shared by the simulator apps.

Each exception carries the exit code the management commands report.
"""


class SimulationError(Exception):
    exit_code = 4


class UsageError(SimulationError):
    exit_code = 1


class ParseError(UsageError):
    """Malformed input text; `line` and `column` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        location = ''
        if line is not None:
            location = f'line {line}'
            if column is not None:
                location += f', column {column}'
            location += ': '
        super().__init__(f'{location}{message}')


class SizeMismatchError(UsageError):
    pass


class NonUnitaryError(UsageError):
    pass


class NonHermitianError(UsageError):
    pass


class InfeasibleError(SimulationError):
    exit_code = 2


class HardwareConstraintError(InfeasibleError):
    pass


class ConfigPolicyError(SimulationError):
    exit_code = 3


class NumericFailure(SimulationError):
    exit_code = 4


class SingularSystemError(NumericFailure):
    pass


class DenseCapExceeded(NumericFailure):
    pass


def usage_error_from(errors, section=None):
    """Turn a serializer ``errors`` mapping into a UsageError naming each field."""
    parts = []
    for field, messages in errors.items():
        if not isinstance(messages, (list, tuple)):
            messages = [messages]
        text = '; '.join(str(m) for m in messages)
        name = f'{section}.{field}' if section and field != 'non_field_errors' else (section or field)
        parts.append(f'{name}: {text}')
    return UsageError(', '.join(parts) or f'invalid {section or "input"}')
