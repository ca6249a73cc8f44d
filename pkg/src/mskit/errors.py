"""Exception types shared across the toolkit."""


class MsKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(MsKitError):
    """Invalid run configuration (bad field, unknown key, missing file)."""


class RangeError(MsKitError, OverflowError):
    """Function argument outside the numerically representable range."""


class DomainError(MsKitError, ValueError):
    """Function argument outside the mathematical domain."""


class MeshError(MsKitError, ValueError):
    """Radial mesh does not satisfy the solver's requirements."""


class ClusterFormatError(MsKitError, ValueError):
    """Malformed cluster or potential file.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SingularMatrixError(MsKitError, ValueError):
    """A matrix required to be invertible is singular to working precision.

    ``context`` identifies which matrix, ``energy`` the energy point (if any)
    at which the singularity occurred.
    """

    def __init__(self, message, context=None, energy=None, rcond=None):
        parts = [message]
        if context:
            parts.append(f"[{context}]")
        if energy is not None:
            parts.append(f"at E = {energy}")
        if rcond is not None:
            parts.append(f"(rcond ~ {rcond:.3e})")
        super().__init__(" ".join(parts))
        self.context = context
        self.energy = energy
        self.rcond = rcond
