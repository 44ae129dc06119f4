# Sphinx configuration for the mdsq documentation.

import importlib.util
import os
import sys
from importlib import import_module

from sphinx.ext.autodoc.mock import mock

here = os.path.split(__file__)[0]
repo_root = os.path.abspath(os.path.join(here, '..'))
src = os.path.join(repo_root, 'python')

# Mock the compiled dependencies that are absent on the docs builder.
autodoc_mock_imports = []
for missing in ('numpy', 'scipy', 'yaml', 'tqdm'):
    try:
        import_module(missing)
    except ImportError:
        autodoc_mock_imports.append(missing)

# The sources live in python/ and install as "mdsq".
try:
    import mdsq
except ImportError:
    spec = importlib.util.spec_from_file_location(
        'mdsq', os.path.join(src, '__init__.py'),
        submodule_search_locations=[src])
    mdsq = importlib.util.module_from_spec(spec)
    sys.modules['mdsq'] = mdsq
    with mock(autodoc_mock_imports):
        spec.loader.exec_module(mdsq)

project = 'mdsq'
copyright = '2026, mdsq developers'
author = 'mdsq developers'
version = mdsq.__version__
release = mdsq.__version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
]
autodoc_default_options = {'member-order': 'bysource'}
autoclass_content = 'both'
master_doc = 'index'
exclude_patterns = ['_build']

try:
    import sphinx_rtd_theme
    html_theme = 'sphinx_rtd_theme'
except ImportError:
    html_theme = 'bizstyle'
