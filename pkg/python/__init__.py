__version__ = '0.1.0'

# Instance configuration.
from .config import get_config
instance_config = get_config()
del get_config

# Other python modules.
from . import model
from . import capacity
from . import regimes
from . import routing
from . import sim
from . import presets

from .model import (SystemSpec, RecoveryPattern, GeneratorSpec,
                    build_system, enumerate_recovery_patterns,
                    verify_pattern_decodable)
