"""Pseudo-optimal routing: minimize the independence-approximated mean
response time over policies that keep every server class below full
load.

Two methods are available.  ``slsqp`` hands the problem, with its
linear load constraints, to scipy.  ``projected_gradient`` descends
with central finite-difference gradients and projects each type's
block back onto the probability simplex.  Both start from several
stabilizing policies and return the best point seen, so the result is
never worse than any start.

"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .. import config
from ..capacity import as_rates
from ..model import all_patterns
from .policies import (RoutingPolicy, InfeasibleError, uniform_uncoded_policy,
                       barycenter_policy, heavy_regime_policy, lp_policy,
                       require_coded_interior)
from .analysis import (load_profile, policy_is_stabilizing,
                       expected_max_exponentials, _weights)

route_logger = logging.getLogger('route_logger')
route_logger.setLevel(logging.INFO)

METHODS = ('slsqp', 'projected_gradient')


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = 'slsqp'
    step: float = 1e-6
    rtol: float = 1e-8
    maxiter: int = 5000
    barrier: float = 1e-6
    restarts: int = 0
    seed: int = 0

    @classmethod
    def from_config(cls, **kw):
        vals = {'method': config.get('optimizer_method'),
                'step': config.get('optimizer_step'),
                'rtol': config.get('optimizer_rtol'),
                'maxiter': config.get('optimizer_maxiter'),
                'barrier': config.get('optimizer_barrier'),
                'seed': config.get('seed')}
        vals.update({k: v for k, v in kw.items() if v is not None})
        if vals['method'] not in METHODS:
            raise ValueError('Unknown optimizer method %s; choose from %s.'
                             % (vals['method'], METHODS))
        return cls(**vals)


def project_simplex(v):
    """Euclidean projection of v onto {x >= 0, sum(x) = 1}."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.
    idx = np.arange(1, len(v) + 1)
    rho = idx[u - css / idx > 0][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.)


class _Problem:
    """Flattened objective over all (type, pattern) probabilities."""

    def __init__(self, system, lam, cfg):
        self.system = system
        self.lam = lam
        self.cfg = cfg
        k = system.k
        pats = all_patterns(system)
        self.blocks = []
        cols, a = [], 0
        for plist in pats:
            self.blocks.append(slice(a, a + len(plist)))
            a += len(plist)
            cols.extend(p.task_vector(k) for p in plist)
        self.size = a
        self.type_of = np.concatenate([np.full(b.stop - b.start, i)
                                       for i, b in enumerate(self.blocks)])
        sizes = system.class_sizes()
        self.live = np.nonzero(sizes > 0)[0]
        tasks = np.array(cols).T                      # (k+1, size)
        # nu = load_matrix @ x, for live classes.
        self.load_matrix = (tasks[self.live] * lam[self.type_of]
                            / sizes[self.live, None])
        self.pattern_classes = []
        for plist in pats:
            for p in plist:
                if p.num_coded == 0:
                    self.pattern_classes.append([p.job_type - 1])
                else:
                    self.pattern_classes.append(
                        [h - 1 for h in p.helper_types] + [k] * p.num_coded)
        self.weights = _weights(lam)
        self.evaluations = 0

    def loads(self, x):
        return self.load_matrix @ x

    def feasible(self, x):
        return bool(np.all(self.loads(x) < 1. - self.cfg.barrier))

    def value(self, x, clamp=True):
        """Objective; outside the barrier it is inf unless clamp, in
        which case residual rates are floored at the barrier."""
        self.evaluations += 1
        nu = np.zeros(self.system.k + 1)
        nu[self.live] = self.loads(x)
        residual = 1. - nu
        if np.any(residual[self.live] <= self.cfg.barrier):
            if not clamp:
                return np.inf
            residual = np.maximum(residual, self.cfg.barrier)
        total = 0.
        for j, classes in enumerate(self.pattern_classes):
            if x[j] != 0.:
                w = self.weights[self.type_of[j]]
                if w > 0:
                    total += w * x[j] * expected_max_exponentials(
                        residual[classes])
        return total

    def gradient(self, x, clamp=True):
        h = self.cfg.step
        g = np.zeros(self.size)
        for j in range(self.size):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            g[j] = (self.value(xp, clamp) - self.value(xm, clamp)) / (2 * h)
        return g

    def project(self, x):
        out = x.copy()
        for b in self.blocks:
            out[b] = project_simplex(x[b])
        return out


def _slsqp(prob, x0):
    cons = [{'type': 'eq',
             'fun': lambda x, b=b: np.sum(x[b]) - 1.,
             'jac': lambda x, b=b: np.where(
                 (np.arange(prob.size) >= b.start)
                 & (np.arange(prob.size) < b.stop), 1., 0.)}
            for b in prob.blocks]
    cons.append({'type': 'ineq',
                 'fun': lambda x: (1. - prob.cfg.barrier) - prob.loads(x),
                 'jac': lambda x: -prob.load_matrix})
    res = optimize.minimize(prob.value, x0, jac=prob.gradient,
                            method='SLSQP', bounds=[(0., 1.)] * prob.size,
                            constraints=cons,
                            options={'maxiter': prob.cfg.maxiter,
                                     'ftol': prob.cfg.rtol})
    route_logger.debug('SLSQP: %s after %i iterations.'
                       % (res.message, res.nit))
    return prob.project(np.clip(res.x, 0., None))


def _projected_gradient(prob, x0):
    x = x0.copy()
    f = prob.value(x, clamp=False)
    eta = 1.
    for it in range(prob.cfg.maxiter):
        g = prob.gradient(x, clamp=False)
        if not np.all(np.isfinite(g)):
            g = prob.gradient(x, clamp=True)
        improved = False
        for _ in range(60):
            cand = prob.project(x - eta * g)
            fc = prob.value(cand, clamp=False)
            # Armijo condition along the projection arc.
            if fc <= f - 1e-4 * g @ (x - cand):
                improved = True
                break
            eta /= 2.
        if not improved:
            break
        rel = (f - fc) / max(abs(f), 1e-300)
        x, f = cand, fc
        eta *= 2.
        if rel < prob.cfg.rtol:
            break
    route_logger.debug('Projected gradient stops after %i iterations '
                       '(f=%.8g).' % (it + 1, f))
    return x


def _starts(system, lam, prob, cfg):
    starts = [('uniform', uniform_uncoded_policy(system)),
              ('barycenter', barycenter_policy(system))]
    try:
        starts.append(('heavy', heavy_regime_policy(system, lam)))
    except (InfeasibleError, ValueError) as e:
        route_logger.debug('No heavy-regime start: %s' % e)
    try:
        starts.append(('lp', lp_policy(system, lam)))
    except InfeasibleError as e:
        route_logger.debug('No LP start: %s' % e)
    rng = np.random.default_rng(cfg.seed)
    anchor = starts[-1][1].flat()
    for r in range(cfg.restarts):
        x = np.concatenate([rng.dirichlet(np.ones(b.stop - b.start))
                            for b in prob.blocks])
        starts.append(('random%i' % r, RoutingPolicy.from_flat(
            system, 0.5 * (x + anchor))))
    return [(name, pol.flat()) for name, pol in starts
            if prob.feasible(pol.flat())]


def pseudo_optimal_policy(system, lam, optimizer_config=None):
    """Minimize the approximated mean response time.

    Args:
        system (SystemSpec): the coded system.
        lam (array-like): arrival rates, strictly inside the coded
          region.
        optimizer_config (OptimizerConfig): method and tolerances; the
          instance configuration supplies defaults.

    Returns:
        RoutingPolicy no worse (in approximated mean response) than any
        stabilizing warm start.

    Raises:
        InfeasibleError: lam is not interior to the coded region, or no
            stabilizing start could be found.

    """
    lam = as_rates(system, lam)
    require_coded_interior(system, lam)
    cfg = optimizer_config or OptimizerConfig.from_config()
    prob = _Problem(system, lam, cfg)
    if all(b.stop - b.start == 1 for b in prob.blocks):
        return uniform_uncoded_policy(system)
    starts = _starts(system, lam, prob, cfg)
    if not starts:
        raise InfeasibleError('No stabilizing warm start for lambda=%s.'
                              % list(lam))
    best_x, best_f, best_name = None, np.inf, None
    for name, x0 in starts:
        candidates = [(name, x0)]
        if cfg.method == 'slsqp':
            candidates.append((name + '+slsqp', _slsqp(prob, x0)))
        else:
            candidates.append((name + '+pg', _projected_gradient(prob, x0)))
        for cname, x in candidates:
            if not prob.feasible(x):
                continue
            f = prob.value(x, clamp=False)
            route_logger.debug('start %s: objective %.10g' % (cname, f))
            if f < best_f:
                best_x, best_f, best_name = x, f, cname
    route_logger.info('Pseudo-optimal policy from %s: objective %.6g '
                      '(%i evaluations).' % (best_name, best_f,
                                            prob.evaluations))
    policy = RoutingPolicy.from_flat(system, best_x)
    assert policy_is_stabilizing(load_profile(system, lam, policy))
    return policy
