"""Dense two-phase simplex for the small linear programs behind the
capacity oracle.

Problems are posed as::

    maximize    c . x
    subject to  A_ub x <= b_ub
                A_eq x  = b_eq
                x >= 0

Pivoting uses Bland's rule, so the method terminates on degenerate
problems.

"""
import logging
from dataclasses import dataclass

import numpy as np

cap_logger = logging.getLogger('cap_logger')
cap_logger.setLevel(logging.INFO)

PIVOT_TOL = 1e-10
FEASIBILITY_TOL = 1e-8


class LPError(RuntimeError):
    """The solver failed to reach an optimum (iteration limit, or an
    unbounded direction where none should exist)."""


@dataclass
class LPResult:
    status: str          # 'optimal' or 'infeasible'
    x: np.ndarray = None
    objective: float = None
    iterations: int = 0


def _pivot(T, row, col):
    T[row, :] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.:
            T[r, :] -= T[r, col] * T[row, :]


def _entering(zrow, allowed):
    for j in np.nonzero(zrow[:-1] < -PIVOT_TOL)[0]:
        if allowed[j]:
            return j
    return -1


def _leaving(T, col, basis):
    # Minimum ratio; ties go to the lowest-index basic variable.
    best, best_ratio = -1, None
    for i in range(T.shape[0] - 1):
        a = T[i, col]
        if a > PIVOT_TOL:
            ratio = T[i, -1] / a
            if best_ratio is None or ratio < best_ratio - 1e-14 or \
               (ratio <= best_ratio + 1e-14 and basis[i] < basis[best]):
                best, best_ratio = i, ratio
    return best


def _run(T, basis, allowed, max_iter):
    for it in range(max_iter):
        j = _entering(T[-1, :], allowed)
        if j < 0:
            return it
        i = _leaving(T, j, basis)
        if i < 0:
            raise LPError('LP is unbounded along column %i.' % j)
        _pivot(T, i, j)
        basis[i] = j
    raise LPError('Simplex hit the iteration limit (%i).' % max_iter)


class TwoPhaseSimplex:
    """Tableau simplex solver.  Phase I drives artificial variables to
    zero; phase II optimizes the real objective from the feasible basis
    phase I leaves behind.

    """
    def __init__(self, max_iter=None):
        self.max_iter = max_iter

    def solve(self, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None):
        c = np.asarray(c, dtype=float)
        nvar = len(c)
        A_ub = np.zeros((0, nvar)) if A_ub is None else np.asarray(A_ub, float)
        b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float)
        A_eq = np.zeros((0, nvar)) if A_eq is None else np.asarray(A_eq, float)
        b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float)
        if A_ub.shape != (len(b_ub), nvar) or A_eq.shape != (len(b_eq), nvar):
            raise ValueError('Constraint shapes do not match %i variables.'
                             % nvar)

        m_ub, m_eq = len(b_ub), len(b_eq)
        m = m_ub + m_eq
        # Rows needing an artificial: equalities, and <= rows with b < 0
        # (flipped to >= with a surplus column).
        flip = b_ub < 0
        n_art = m_eq + int(flip.sum())
        ncol = nvar + m_ub + n_art
        T = np.zeros((m + 1, ncol + 1))
        basis = []
        art = nvar + m_ub
        for i in range(m_ub):
            sign = -1. if flip[i] else 1.
            T[i, :nvar] = sign * A_ub[i]
            T[i, nvar + i] = sign
            T[i, -1] = sign * b_ub[i]
            if flip[i]:
                T[i, art] = 1.
                basis.append(art)
                art += 1
            else:
                basis.append(nvar + i)
        for i in range(m_eq):
            sign = -1. if b_eq[i] < 0 else 1.
            r = m_ub + i
            T[r, :nvar] = sign * A_eq[i]
            T[r, -1] = sign * b_eq[i]
            T[r, art] = 1.
            basis.append(art)
            art += 1
        max_iter = self.max_iter or 50 * (m + ncol) + 1000
        is_art = np.zeros(ncol, dtype=bool)
        is_art[nvar + m_ub:] = True

        # Phase I: maximize -sum(artificials).
        iterations = 0
        if n_art:
            T[-1, :ncol][is_art] = 1.
            for r, b in enumerate(basis):
                if is_art[b]:
                    T[-1, :] -= T[r, :]
            iterations += _run(T, basis, np.ones(ncol, dtype=bool), max_iter)
            if T[-1, -1] < -FEASIBILITY_TOL:
                cap_logger.debug('Phase I ends at %.3e; infeasible.'
                                 % T[-1, -1])
                return LPResult('infeasible', iterations=iterations)
            # Pivot any zero-level artificials out of the basis; rows
            # that cannot be pivoted are redundant.
            keep = []
            for r, b in enumerate(basis):
                if is_art[b]:
                    cols = np.nonzero((np.abs(T[r, :ncol]) > PIVOT_TOL)
                                      & ~is_art)[0]
                    if len(cols):
                        _pivot(T, r, cols[0])
                        basis[r] = cols[0]
                    else:
                        continue
                keep.append(r)
            T = np.vstack([T[keep], T[-1:]])
            basis = [basis[r] for r in keep]

        # Phase II.
        T[-1, :] = 0.
        T[-1, :nvar] = -c
        for r, b in enumerate(basis):
            if T[-1, b] != 0.:
                T[-1, :] -= T[-1, b] * T[r, :]
        iterations += _run(T, basis, ~is_art, max_iter)
        x = np.zeros(ncol)
        for r, b in enumerate(basis):
            x[b] = T[r, -1]
        x = np.clip(x[:nvar], 0., None)
        cap_logger.debug('Simplex optimal after %i pivots.' % iterations)
        return LPResult('optimal', x=x, objective=float(c @ x),
                        iterations=iterations)
