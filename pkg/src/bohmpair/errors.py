"""Exception hierarchy shared by all modules."""


class BohmPairError(Exception):
    """Base class for library errors."""


class NodeError(BohmPairError, ValueError):
    """The guiding wave vanishes, so the phase and the momenta are undefined."""


class PoleError(BohmPairError, ValueError):
    """A rotor axis sits on the z-axis where the Euler chart is singular."""


class StencilError(BohmPairError, ValueError):
    """A finite-difference stencil point fell on a node or a pole."""


class DegenerateProjectionError(BohmPairError, ValueError):
    """An xy-plane projection vanishes; the azimuth is undefined."""


class DomainError(BohmPairError, ValueError):
    """Argument outside the domain of a closed form or a probability."""


class RegimeError(BohmPairError, ValueError):
    """A relation was requested for a state where it is not established."""


class EmptyEnsemble(BohmPairError, ValueError):
    """No sample with positive weight was accumulated."""


class EnvelopeViolation(BohmPairError, RuntimeError):
    """A rejection-sampling proposal exceeded the analytic envelope."""


class IllConditionedExtraction(BohmPairError, ValueError):
    pass


class ClippedMassTooLarge(BohmPairError, ValueError):
    """Too much weight fell outside the histogram range."""


class ResolutionError(BohmPairError, ValueError):
    """The histogram is too coarse for the requested resolution."""


class StepUnderflow(BohmPairError, RuntimeError):
    """The integrator step shrank below its floor, usually near a node or pole."""
