"""Compare the uncoded and coded capacity regions of a small
two-type system, and route one arrival-rate vector that only the coded
system can carry."""
import mdsq
from mdsq import capacity, regimes, routing

system = mdsq.build_system(64, 2, 4, [0.5, 0.5])
print('System: s=%s, n_coded=%i' % (system.s, system.n_coded))
print('Region areas: uncoded %.1f, coded %.1f'
      % (capacity.uncoded_area_k2(system), capacity.region_area_k2(system)))

lam = [33., 20.]
print('lambda = %s' % lam)
print('  uncoded:', capacity.uncoded_contains(system, lam).verdict)
print('  coded:  ', capacity.coded_contains_waterfill(system, lam).verdict)
print('  regime: ', regimes.classify_regime(system, lam).label)

policy = routing.pseudo_optimal_policy(system, lam)
profile = routing.load_profile(system, lam, policy)
print('Server-class loads: %s' % ['%.3f' % x for x in profile.nu])
print('Approximate mean response time: %.3f'
      % routing.approx_mean_response(system, lam, policy, profile).value)
