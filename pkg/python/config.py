"""This module supports instance configuration for mdsq.  Defaults are
hard-coded below; a YAML file named by the MDSQ_CONFIG environment
variable may override any of them.

"""
import os

import yaml

DEFAULTS = {
    'tolerance': 1e-9,          # rate units; membership and stability.
    'light_const': 0.5,         # c_L in beta_1 >= c_L*sqrt(n*n_coded).
    'heavy_gap_const': 2.0,     # c_H.
    'outer_const': 0.25,        # c_O in beta_1 < c_O*n_coded.
    'kstar_const': 1.0,         # c in the k* rule.
    'occupancy_cap': 1000000,   # jobs in system before UNSTABLE.
    'warmup_fraction': 0.1,
    'departures': 1000000,
    'replications': 20,
    'seed': 42,
    'workers': 1,
    'trajectory_points': 200,   # samples per square-wave period.
    'optimizer_method': 'slsqp',  # string.  slsqp, projected_gradient
    'optimizer_step': 1e-6,
    'optimizer_rtol': 1e-8,
    'optimizer_maxiter': 5000,
    'optimizer_barrier': 1e-6,
    'rng_block': 4096,
}

ENV_VAR = 'MDSQ_CONFIG'


def load_overrides(filename):
    """Read a YAML file of config overrides and check the keys.

    Returns:
        dict of overrides.

    Raises:
        ValueError: if the file holds something other than a mapping,
          or a key unknown to DEFAULTS.

    """
    with open(filename) as fin:
        overrides = yaml.safe_load(fin) or {}
    if not isinstance(overrides, dict):
        raise ValueError('Config file %s must hold a mapping.' % filename)
    unknown = sorted(set(overrides) - set(DEFAULTS))
    if len(unknown):
        raise ValueError('Unknown config keys in %s: %s' % (filename, unknown))
    return overrides


def get_config():
    config = DEFAULTS.copy()
    filename = os.getenv(ENV_VAR)
    if filename:
        config.update(load_overrides(filename))
    return config


def get(key, value=None):
    """Return value unless it is None, in which case return the
    instance configuration's entry for key."""
    if value is not None:
        return value
    import mdsq
    return mdsq.instance_config[key]
