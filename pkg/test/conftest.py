# Make an uninstalled checkout importable as "mdsq": the sources live
# in python/, which CMake installs under that name.
import importlib.util
import os
import sys

try:
    import mdsq  # noqa: F401
except ImportError:
    src = os.path.join(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__))), 'python')
    spec = importlib.util.spec_from_file_location(
        'mdsq', os.path.join(src, '__init__.py'),
        submodule_search_locations=[src])
    module = importlib.util.module_from_spec(spec)
    sys.modules['mdsq'] = module
    spec.loader.exec_module(module)
