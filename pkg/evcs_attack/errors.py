"""
Exception hierarchy for evcs-attack
"""

from pathlib import Path
from typing import Optional


class EvcsAttackError(Exception):
    """Base class for every error raised by the toolkit"""


class GridSpecError(EvcsAttackError, ValueError):
    """Grid data could not be turned into a model"""


class GridParseError(GridSpecError):
    """The grid file is missing or malformed"""

    def __init__(self, message: str, path: Optional[Path] = None):
        self.path = path
        prefix = f"{path}: " if path is not None else ""
        super().__init__(f"{prefix}{message}")


class GridValidationError(GridSpecError):
    """A grid invariant is violated; `field` is the dotted location of the offending value"""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class SingularDescriptorError(GridSpecError):
    """Descriptor matrix E cannot be inverted (some load damping is not positive)"""


class SimulationError(EvcsAttackError):
    """Time stepping produced a non-finite state"""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (t = {time:.6g} s)")


class ScenarioInfeasibleError(EvcsAttackError):
    """The operating-state simulation never reached the trip boundary"""


class SynthesisError(EvcsAttackError):
    """Attack synthesis failed; `stage` names the pipeline step"""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
