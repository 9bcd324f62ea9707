"""Domain decomposition driven by the local de Broglie wavelength.

The interval [r_min, r_max] is split into elements such that each one
holds a fixed amount of semiclassical phase

    beta = sqrt(2 mu) / pi * int_{r0}^{r1} sqrt(max(E_asy - V(r), 0)) dr,

so elements grow where the reference momentum is small.  Classically
forbidden stretches (V >= E_asy) accumulate no phase; there the element
size of the nearest allowed region is carried forward so resolution never
degrades across turning points or potential walls.
"""

from dataclasses import dataclass, field

import numpy as np

from .gll import GllRule

__all__ = [
    "MappingSpec",
    "DomainDecomposition",
    "GlobalGrid",
    "phase_integral",
    "next_breakpoint",
    "decompose",
    "build_grid",
    "calibrate_beta",
    "graded_breakpoints",
]

_BISECT_TOL = 1e-10  # bohr


class MappingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature (vectorized over panels)

_K15_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_K15_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _adaptive_quad(f, a, b, rtol=1e-11, atol=1e-13, max_depth=38):
    """Adaptive K15/G7 quadrature; f must accept an ndarray.

    Square-root kinks (classical turning points) converge slowly under
    bisection, so the depth limit is generous; only the panels straddling
    a kink keep subdividing, and their count stays O(depth).
    """
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    total = 0.0
    scale = abs(b - a)
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _K15_NODES[None, :]
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        k15 = half * (fx @ _K15_WEIGHTS)
        g7 = half * (fx[:, 1::2] @ _G7_WEIGHTS)
        err = np.abs(k15 - g7)
        tol_total = max(atol, rtol * (abs(total) + float(np.abs(k15).sum())))
        budget = tol_total * (hi - lo) / scale + 1e-17 * abs(total)
        done = err <= budget
        total += float(k15[done].sum())
        if done.all():
            return total
        lo, hi = lo[~done], hi[~done]
        mid = 0.5 * (lo + hi)
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
        order = np.argsort(lo)
        lo, hi = lo[order], hi[order]
    raise MappingError(
        f"phase quadrature failed to reach tolerance on [{a}, {b}]"
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MappingSpec:
    """Parameters of the phase-space element sizing.

    r_min, r_max : domain edges (bohr)
    beta : phase budget per element, 0 < beta <= 1
    e_asy : reference energy for the local momentum (hartree)
    mu : mass (a.u.)
    uniform_size : when set, skip the implicit equation and lay out equal
        elements of this size (bohr)
    """

    r_min: float
    r_max: float
    beta: float = 1.0
    e_asy: float = 0.0
    mu: float = 1.0
    uniform_size: float | None = None

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise ValueError("need r_min < r_max")
        if self.uniform_size is None and not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")


@dataclass(frozen=True)
class DomainDecomposition:
    """Ordered element breakpoints r^0 < r^1 < ... < r^M."""

    breakpoints: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if bp.ndim != 1 or len(bp) < 2 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)

    @property
    def n_elements(self):
        return len(self.breakpoints) - 1

    @property
    def jacobians(self):
        """Per-element affine Jacobians (r^k - r^{k-1}) / 2."""
        return 0.5 * np.diff(self.breakpoints)

    def element_sizes(self):
        return np.diff(self.breakpoints)


@dataclass(frozen=True)
class GlobalGrid:
    """Assembled collocation grid with merged interface weights."""

    decomposition: DomainDecomposition
    order: int
    points: np.ndarray          # (N*M + 1,)
    gamma: np.ndarray           # merged weights, same shape
    element_weights: np.ndarray = field(repr=False)  # (M, N+1) w^k_j

    @property
    def npoints(self):
        return len(self.points)

    def global_index(self, k, j):
        """Global index of local node j in element k (0-based)."""
        N = self.order
        if not (0 <= k < self.decomposition.n_elements and 0 <= j <= N):
            raise IndexError("element or node index out of range")
        return k * N + j

    def element_of(self, i):
        """Inverse map: (element, local node) for a global index.

        Interface points are attributed to the left element (j = N).
        """
        N = self.order
        M = self.decomposition.n_elements
        if not 0 <= i < self.npoints:
            raise IndexError("global index out of range")
        if i == 0:
            return 0, 0
        k = (i - 1) // N
        j = i - k * N
        if k >= M:
            k, j = M - 1, N
        return k, j


def phase_integral(V, r0, r1, e_asy, mu=1.0):
    """Semiclassical phase content of [r0, r1] at reference energy e_asy.

    Returns sqrt(2 mu)/pi * int sqrt(max(e_asy - V, 0)) dr, evaluated by
    adaptive Gauss-Kronrod quadrature.  The clamp makes classically
    forbidden stretches contribute zero.
    """
    if r1 < r0:
        raise ValueError("need r0 <= r1")
    if r1 == r0:
        return 0.0
    def integrand(x):
        return np.sqrt(np.maximum(e_asy - np.asarray(V(x), dtype=float), 0.0))
    value = _adaptive_quad(integrand, r0, r1)
    return np.sqrt(2.0 * mu) / np.pi * value


def _first_allowed(V, r0, r_max, e_asy, samples=4096):
    """First point of [r0, r_max] with V < e_asy, or None."""
    rs = np.linspace(r0, r_max, samples)
    ok = np.asarray(V(rs), dtype=float) < e_asy
    if not ok.any():
        return None
    i = int(np.argmax(ok))
    if i == 0:
        return r0
    lo, hi = rs[i - 1], rs[i]
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if float(V(np.array([mid]))[0] if np.ndim(V(mid)) else V(mid)) < e_asy:
            hi = mid
        else:
            lo = mid
    return hi


def _allowed_end(V, r0, r_max, e_asy, samples=4096):
    """End of the allowed stretch beginning at r0 (crossing above e_asy)."""
    rs = np.linspace(r0, r_max, samples)
    bad = np.asarray(V(rs), dtype=float) >= e_asy
    bad[0] = False
    if not bad.any():
        return r_max
    i = int(np.argmax(bad))
    lo, hi = rs[i - 1], rs[i]
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if float(V(np.array([mid]))[0] if np.ndim(V(mid)) else V(mid)) >= e_asy:
            hi = mid
        else:
            lo = mid
    return lo


def _solve_phase_equation(V, r0, cap, spec, h_start):
    """Smallest r1 in (r0, cap] with phase_integral(r0, r1) = beta, or cap.

    Bisection accumulates phase incrementally (the integral is additive),
    so every quadrature call covers a short, mostly smooth interval.
    """
    if phase_integral(V, r0, cap, spec.e_asy, spec.mu) < spec.beta:
        return cap
    hi = min(r0 + h_start, cap)
    acc_at = r0       # phase accumulated on [r0, acc_at]
    acc = 0.0
    for _ in range(200):
        acc += phase_integral(V, acc_at, hi, spec.e_asy, spec.mu)
        acc_at = hi
        if acc >= spec.beta:
            break
        hi = min(r0 + 2.0 * (hi - r0), cap)
    else:
        raise MappingError("bracket expansion failed in next_breakpoint")
    lo = r0
    lo_acc = 0.0
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        mid_acc = lo_acc + phase_integral(V, lo, mid, spec.e_asy, spec.mu)
        if mid_acc < spec.beta:
            lo, lo_acc = mid, mid_acc
        else:
            hi = mid
    return 0.5 * (lo + hi)


def next_breakpoint(V, r0, spec, prev_size=None):
    """Upper edge of the element starting at r0.

    Solves the implicit phase equation by bracketing plus bisection
    (tolerance 1e-10 bohr).  Returns r_max when the remaining phase budget
    is below beta.  Where the integrand vanishes (V >= e_asy) the element
    size is kept constant: the previous size is carried forward, and at
    the very start of the domain the size of the first allowed element is
    used for the forbidden prefix.
    """
    r_max = spec.r_max
    if r0 >= r_max:
        raise ValueError("r0 must lie below r_max")
    v0 = float(np.atleast_1d(np.asarray(V(np.array([r0])), dtype=float))[0])
    if v0 >= spec.e_asy:
        r_allow = _first_allowed(V, r0, r_max, spec.e_asy)
        if prev_size is None:
            if r_allow is None:
                raise MappingError(
                    "potential is classically forbidden on the whole "
                    "domain; use uniform_size"
                )
            cap = _allowed_end(V, r_allow, r_max, spec.e_asy)
            r1a = _solve_phase_equation(
                V, r_allow, cap, spec, (r_max - spec.r_min) / 128.0
            )
            h = r1a - r_allow
            n_fill = max(1, int(np.ceil((r_allow - r0) / h)))
            return r0 + (r_allow - r0) / n_fill
        if r_allow is None:
            return min(r0 + prev_size, r_max)
        return min(r0 + prev_size, r_allow)
    cap = _allowed_end(V, r0, r_max, spec.e_asy)
    h_start = prev_size if prev_size else (r_max - spec.r_min) / 128.0
    return _solve_phase_equation(V, r0, cap, spec, h_start)


def decompose(V, spec):
    """Chain next_breakpoint from r_min to r_max.

    A trailing element shorter than 10% of its predecessor is merged into
    the previous one instead of spawning a degenerate micro-element.
    """
    if spec.uniform_size is not None:
        h = spec.uniform_size
        n = max(1, int(round((spec.r_max - spec.r_min) / h)))
        return DomainDecomposition(np.linspace(spec.r_min, spec.r_max, n + 1))
    breaks = [spec.r_min]
    prev = None
    while breaks[-1] < spec.r_max - _BISECT_TOL:
        r0 = breaks[-1]
        r1 = next_breakpoint(V, r0, spec, prev)
        if spec.r_max - r1 < 0.1 * (r1 - r0):
            r1 = spec.r_max
        breaks.append(r1)
        prev = r1 - r0
    if len(breaks) >= 3 and breaks[-1] - breaks[-2] < 0.1 * (
        breaks[-2] - breaks[-3]
    ):
        del breaks[-2]
    return DomainDecomposition(np.array(breaks))


def calibrate_beta(V, spec, n_elements, max_iter=12):
    """Find beta such that decompose() yields about n_elements elements.

    The element count is nearly proportional to 1/beta, so a few fixed
    point corrections converge quickly.  Returns (beta, decomposition).
    """
    total = phase_integral(V, spec.r_min, spec.r_max, spec.e_asy, spec.mu)
    if total <= 0:
        raise MappingError("no classically allowed phase to distribute")
    beta = min(total / n_elements, 1.0)
    best = None
    for _ in range(max_iter):
        trial = MappingSpec(spec.r_min, spec.r_max, beta, spec.e_asy, spec.mu)
        dec = decompose(V, trial)
        miss = abs(dec.n_elements - n_elements)
        if best is None or miss < best[0]:
            best = (miss, beta, dec)
        if dec.n_elements == n_elements:
            break
        beta = min(beta * dec.n_elements / n_elements, 1.0)
    return best[1], best[2]


def graded_breakpoints(r_max, core_half_width, core_size, outer_size,
                       taper=3.0):
    """Symmetric breakpoints around 0: fine core, linear taper outward.

    Convenience constructor for driven-dynamics grids where the fast
    physics is confined near the origin.  Element size is ``core_size``
    for |r| < core_half_width and ramps linearly to ``outer_size`` over
    ``taper`` core widths.
    """
    right = [0.0]
    x = 0.0
    while x < r_max - 1e-9:
        if x < core_half_width:
            h = core_size
        else:
            f = min((x - core_half_width) / (taper * core_half_width), 1.0)
            h = core_size + (outer_size - core_size) * f
        x = min(x + h, r_max)
        right.append(x)
    right = np.array(right)
    if len(right) >= 3 and right[-1] - right[-2] < 0.25 * (
        right[-2] - right[-3]
    ):
        right = np.delete(right, -2)
    return DomainDecomposition(
        np.concatenate([-right[::-1][:-1], right])
    )


def build_grid(dec, rule):
    """Map the reference rule into every element and merge weights.

    Points are the affine images of the GLL nodes; interface points are
    stored once, with weight w^k_N + w^{k+1}_0.  The total weight equals
    the domain length (quadrature of 1, element by element).
    """
    if not isinstance(rule, GllRule):
        raise TypeError("build_grid expects a GllRule")
    N = rule.order
    M = dec.n_elements
    bp = dec.breakpoints
    jac = dec.jacobians
    npts = N * M + 1
    points = np.zeros(npts)
    gamma = np.zeros(npts)
    wk = jac[:, None] * rule.weights[None, :]
    for k in range(M):
        sl = slice(k * N, k * N + N + 1)
        points[sl] = rule.nodes * jac[k] + 0.5 * (bp[k] + bp[k + 1])
        gamma[sl] += wk[k]
    points[0], points[-1] = bp[0], bp[-1]
    return GlobalGrid(dec, N, points, gamma, wk)
