"""Exception hierarchy shared by the simulation modules and the CLI."""


class DFSPhotonError(Exception):
    """Base class for every error raised by the package."""


class InputError(DFSPhotonError, ValueError):
    """Malformed or inconsistent input (shapes, grids, conventions)."""


class IntegrationAccuracyError(DFSPhotonError):
    """Integrator drift exceeded its tolerance; retry with a smaller ``dt``."""


class GateRegimeError(DFSPhotonError):
    """Drive parameters are outside the regime where the gate is defined."""


class ControlSingularityError(DFSPhotonError):
    """The inverse emission problem has no solution for the requested target."""


class SpectralAccuracyError(DFSPhotonError):
    """Time grid too coarse for the spectral scattering method."""


class SizeLimitError(DFSPhotonError):
    """Requested register is larger than the dense-vector limit."""


# numerical failures map onto CLI exit status 3
NUMERICAL_ERRORS = (
    IntegrationAccuracyError,
    GateRegimeError,
    ControlSingularityError,
    SpectralAccuracyError,
    SizeLimitError,
)


class GateRegimeWarning(UserWarning):
    """Drive is outside the weak-drive regime; results are still returned."""
