"""Routing policies, the loads they induce, and the pseudo-optimal
policy search."""
from .policies import (RoutingPolicy, InfeasibleError, uniform_uncoded_policy,
                       barycenter_policy, kpattern_policy, heavy_regime_policy,
                       uncoded_unstable_policy, lp_policy,
                       require_coded_interior)
from .analysis import (LoadProfile, ApproxObjective, PropertyCheck,
                       NotStabilizingError, load_profile,
                       policy_is_stabilizing, check_property_41,
                       expected_max_exponentials, approx_mean_response,
                       uncoded_mean_response, aggregate_q)
from .optimize import (OptimizerConfig, pseudo_optimal_policy,
                       project_simplex)
