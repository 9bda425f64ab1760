"""Hidden-variable statistics of an entangled pair of spin-1/2 rigid rotors."""

from importlib import metadata

try:
    __version__ = metadata.version("artifact")
except metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .rotor import EulerTriple, PairConfiguration, PairStateParams, PhysicalConstants  # noqa: E402

__all__ = ["EulerTriple", "PairConfiguration", "PairStateParams", "PhysicalConstants",
           "__version__"]
