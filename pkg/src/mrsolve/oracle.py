"""Finite-difference cross-check of the x-space equation.

At a fixed energy in the potential term the equation

    -Psi'' + 2(E + m) V(x) Psi = mu Psi,   mu = E^2 - m^2

is an ordinary symmetric eigenproblem.  It is discretized with the
three-point stencil on a truncated interval with Dirichlet ends, and the
eigenvalues of the resulting tridiagonal matrix are located by Sturm-count
bisection.  The energy dependence of the potential term is resolved by a
damped fixed-point loop with a bisection fallback.

Nothing here uses the AIM machinery or any closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, NoBoundState, ParameterError
from .potentials import asymptotic_values, domain_of, evaluate_potential

MIN_POINTS = 64


@dataclass(frozen=True)
class GridSpec:
    x_lo: float
    x_hi: float
    N: int
    boundary: str = "dirichlet"

    @property
    def h(self):
        return (self.x_hi - self.x_lo) / (self.N + 1)

    def points(self):
        return self.x_lo + self.h * np.arange(1, self.N + 1)

    def doubled(self):
        return replace(self, N=2 * self.N + 1)


def validate_grid(spec, grid):
    if grid.N < MIN_POINTS:
        raise ParameterError(f"grid needs at least {MIN_POINTS} interior points")
    if grid.boundary != "dirichlet":
        raise ParameterError("only Dirichlet boundaries are supported")
    if not grid.x_hi > grid.x_lo:
        raise ParameterError("x_hi must exceed x_lo")
    dom = domain_of(spec)
    if dom.singular_point is not None and grid.x_lo < dom.singular_point:
        raise ParameterError(f"grid starts below the singular point {dom.singular_point}")


def default_grid(spec, N=4000, lengths=30.0):
    dom = domain_of(spec)
    reach = lengths / spec.alpha
    if dom.singular_point is not None:
        lo = dom.singular_point + 1e-4 / spec.alpha
        return GridSpec(lo, dom.singular_point + reach, N)
    return GridSpec(-reach, reach, N)


# -- tridiagonal machinery -------------------------------------------------------

class Tridiagonal:
    """Symmetric tridiagonal matrix with a constant off-diagonal."""

    def __init__(self, diag, off):
        self.diag = [float(d) for d in diag]
        self.off = float(off)
        self.off2 = self.off * self.off
        radius = 2 * abs(self.off)
        self.lower = min(self.diag) - radius
        self.upper = max(self.diag) + radius

    def count(self, x):
        # first row has no sub-diagonal: start the recursion with off2/qv = 0
        diag = self.diag
        count = 0
        qv = diag[0] - x
        if qv == 0.0:
            qv = 1e-300
        if qv < 0.0:
            count += 1
        off2 = self.off2
        for d in diag[1:]:
            qv = d - x - off2 / qv
            if qv == 0.0:
                qv = 1e-300
            if qv < 0.0:
                count += 1
        return count

    def eigenvalue(self, j, guess=None, rtol=1e-14):
        """j-th smallest eigenvalue (0-based) by bisection on the Sturm count."""
        if guess is None:
            lo, hi = self.lower, self.upper
        else:
            w = max(abs(guess) * 1e-3, 1e-8)
            lo, hi = guess - w, guess + w
            while self.count(lo) > j:
                lo -= 2 * (hi - lo)
            while self.count(hi) <= j:
                hi += 2 * (hi - lo)
        scale = max(abs(self.lower), abs(self.upper))
        while hi - lo > rtol * max(abs(lo), abs(hi), 1e-12 * scale):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if self.count(mid) > j:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def eigenvector(self, mu, iterations=4):
        """Inverse iteration at a shift just off ``mu`` (Thomas solves)."""
        n = len(self.diag)
        shift = mu + 1e-10 * max(1.0, abs(mu))
        v = np.ones(n) / math.sqrt(n)
        for _ in range(iterations):
            v = self._solve(shift, v)
            v /= np.linalg.norm(v)
        return v

    def _solve(self, shift, rhs):
        n = len(self.diag)
        e = self.off
        cp = np.empty(n)
        dp = np.empty(n)
        b = self.diag[0] - shift
        cp[0] = e / b
        dp[0] = rhs[0] / b
        for i in range(1, n):
            b = self.diag[i] - shift - e * cp[i - 1]
            if b == 0.0:
                b = 1e-300
            cp[i] = e / b
            dp[i] = (rhs[i] - e * dp[i - 1]) / b
        x = np.empty(n)
        x[-1] = dp[-1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
        return x


def hamiltonian(spec, grid, E_potential):
    validate_grid(spec, grid)
    h = grid.h
    xs = grid.points()
    U = 2.0 * (E_potential + spec.m) * evaluate_potential(spec, xs)
    return Tridiagonal(2.0 / h**2 + U, -1.0 / h**2)


def diagonalize_fixed_E(spec, grid, E_potential, count=3):
    """Lowest ``count`` eigenvalues of -d^2/dx^2 + 2(E + m) V(x)."""
    H = hamiltonian(spec, grid, E_potential)
    out = []
    for j in range(count):
        out.append(H.eigenvalue(j))
    return np.array(out)


# -- self-consistent energies ------------------------------------------------------

@dataclass(frozen=True)
class OracleLevel:
    n: int
    E: float
    residual: float
    ratio: float | None = None
    boundary_ok: bool = True
    nodes: int | None = None
    extrapolated: float | None = None

    def as_dict(self):
        return {
            "n": self.n,
            "E": self.E,
            "residual": self.residual,
            "grid_ratio": self.ratio,
            "boundary_ok": self.boundary_ok,
            "nodes": self.nodes,
            "E_extrapolated": self.extrapolated,
        }


@dataclass
class OracleResult:
    levels: list = field(default_factory=list)
    iterations: int = 0

    def to_record(self):
        return {"iterations": self.iterations, "levels": [lv.as_dict() for lv in self.levels]}


def continuum_threshold(spec, E):
    """Lowest mu at which the spectrum of the truncated problem stops being bound."""
    ends = [v for v in asymptotic_values(spec) if v is not None]
    return 2.0 * (E + spec.m) * min(ends)


def _mu(spec, grid, E, n, guess=None):
    H = hamiltonian(spec, grid, E)
    return H.eigenvalue(n, guess), H


def self_consistent_solve(spec, grid, n, branch="particle", *, E0=None, tol=1e-10,
                          max_iter=500, damping=0.5):
    """E with E^2 - m^2 = mu_n(E), returned as an :class:`OracleLevel`.

    The level is accepted only if mu_n lies below the continuum threshold at
    the converged energy.
    """
    m = spec.m
    sign = 1.0 if branch == "particle" else -1.0
    E = 0.0 if E0 is None else float(E0)
    trace = []
    mu = None
    converged = False
    for it in range(1, max_iter + 1):
        mu, _ = _mu(spec, grid, E, n, mu)
        arg = m * m + mu
        if arg < 0:
            break
        target = sign * math.sqrt(arg)
        new = (1 - damping) * E + damping * target
        trace.append(new)
        if abs(new - E) < tol * m:
            E = new
            converged = True
            break
        E = new
        if len(trace) > 20 and abs(trace[-1] - trace[-3]) < tol * m < abs(trace[-1] - trace[-2]):
            break
    iterations = len(trace)
    if not converged:
        E, extra = _bisect_energy(spec, grid, n, sign)
        iterations += extra
    mu, H = _mu(spec, grid, E, n, mu)
    if mu >= continuum_threshold(spec, E) or abs(E) >= m:
        raise NoBoundState(f"oracle: level {n} is not below the continuum")
    residual = abs(E * E - m * m - mu)
    vec = H.eigenvector(mu)
    peak = np.max(np.abs(vec))
    # a Dirichlet end sitting on the singular wall is a true boundary, not a truncation
    ends = [abs(vec[-1])] if domain_of(spec).singular_point is not None else [abs(vec[0]), abs(vec[-1])]
    ok = max(ends) < 1e-8 * peak
    nodes = int(np.count_nonzero(np.diff(np.sign(vec[np.abs(vec) > 1e-12 * peak])) != 0))
    return OracleLevel(n, E, residual, None, ok, nodes), iterations


def _bisect_energy(spec, grid, n, sign, iters=200):
    m = spec.m

    def g(E):
        mu, _ = _mu(spec, grid, E, n)
        return E * E - m * m - mu

    lo, hi = (0.0, m * (1 - 1e-12)) if sign > 0 else (-m * (1 - 1e-12), 0.0)
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        # g is monotone enough on each half for a coarse scan to find the sign change
        xs = np.linspace(lo, hi, 65)
        gs = [g(x) for x in xs]
        for a, b, ga, gb in zip(xs[:-1], xs[1:], gs[:-1], gs[1:]):
            if ga * gb <= 0:
                lo, hi, glo, ghi = a, b, ga, gb
                break
        else:
            raise NoBoundState(f"oracle: no self-consistent energy for level {n}")
    count = 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        count += 1
        if glo * gm <= 0:
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
        if hi - lo < 1e-13 * m:
            break
    return 0.5 * (lo + hi), count


def solve_level(spec, n, grid=None, branch="particle", *, convergence=False, widen=2):
    """Oracle energy of level n with boundary check.

    With ``convergence=True`` the level is re-solved on two doubled grids; the
    error ratio and a Richardson-extrapolated energy are attached.
    """
    grid = grid or default_grid(spec)
    level, iters = self_consistent_solve(spec, grid, n, branch)
    tries = 0
    while not level.boundary_ok and tries < widen:
        warnings.warn(f"oracle: level {n} not negligible at the truncation points; widening", RuntimeWarning)
        grid = _widened(spec, grid)
        level, more = self_consistent_solve(spec, grid, n, branch, E0=level.E)
        iters += more
        tries += 1
    if convergence:
        g2 = grid.doubled()
        g4 = g2.doubled()
        e2, _ = self_consistent_solve(spec, g2, n, branch, E0=level.E)
        e4, _ = self_consistent_solve(spec, g4, n, branch, E0=e2.E)
        d1, d2 = level.E - e2.E, e2.E - e4.E
        ratio = d1 / d2 if d2 != 0 else math.inf
        # Richardson step on the finest pair (second-order stencil)
        level = replace(level, ratio=ratio, extrapolated=e4.E + (e4.E - e2.E) / 3.0)
    return level, iters


def _widened(spec, grid):
    dom = domain_of(spec)
    span = grid.x_hi - grid.x_lo
    lo = grid.x_lo if dom.singular_point is not None else grid.x_lo - 0.5 * span
    hi = grid.x_hi + 0.5 * span
    scale = (hi - lo) / span
    return GridSpec(lo, hi, int(grid.N * scale))


def oracle_levels(spec, grid=None, branch="particle", n_max=50, **kw):
    """Every oracle level from n = 0 upward until the first unbound one."""
    result = OracleResult()
    for n in range(n_max):
        try:
            level, iters = solve_level(spec, n, grid, branch, **kw)
        except NoBoundState:
            break
        result.levels.append(level)
        result.iterations += iters
    return result


# -- analytic self-test ----------------------------------------------------------------

def box_eigenvalues(L, N, count=3):
    """Finite-difference eigenvalues of -d^2/dx^2 on (0, L) with V = 0."""
    h = L / (N + 1)
    H = Tridiagonal(np.full(N, 2.0 / h**2), -1.0 / h**2)
    return np.array([H.eigenvalue(j) for j in range(count)])


def box_self_test(L=10.0, N=2000, count=3):
    """Relative errors at N and 2N+1 against (k pi / L)^2 and their ratios."""
    exact = np.array([(k * math.pi / L) ** 2 for k in range(1, count + 1)])
    coarse = box_eigenvalues(L, N, count)
    fine = box_eigenvalues(L, 2 * N + 1, count)
    err_c = np.abs(coarse - exact) / exact
    err_f = np.abs(fine - exact) / exact
    return {
        "exact": exact.tolist(),
        "coarse": coarse.tolist(),
        "fine": fine.tolist(),
        "rel_error": err_c.tolist(),
        "ratio": (err_c / err_f).tolist(),
        "passed": bool(np.all(err_c < 1e-3) and np.all(np.abs(err_c / err_f - 4) < 0.5)),
    }
