from .config import settings
from .errors import (
    ConstructionError,
    ParameterError,
    PartitionError,
    DimensionError,
    PreconditionError,
    EnumerationCapExceeded,
    ConvergenceError,
    SizeCapExceeded,
    InstanceFormatError
)
from .logging import configure_logging
from .seeding import stage_seed, stage_rng, as_rng
