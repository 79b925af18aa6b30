"""Error taxonomy shared across modules and mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries every violated field."""

    def __init__(self, violations):
        self.violations = [str(v) for v in violations]
        super().__init__("; ".join(self.violations) or "invalid configuration")


class PlotSchemaError(ValueError):
    """Plot input file does not match the expected column schema."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class CapacityError(ValueError):
    """Requested problem size exceeds a configured solver cap."""
