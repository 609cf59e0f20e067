"""Heat-equation test problems with exact solutions, and collocation grids.

All problems are of the form u_t = nu * u_xx + f(t, x) on an interval with
Dirichlet data at both endpoints.  The three cataloged cases cover a
two-mode decaying solution with a tunable stiff component, an incompatible
(discontinuous at the corners) initial/boundary pair, and a rapidly
decaying single mode.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

CORNER_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """A linear parabolic problem u_t = nu u_xx + f with Dirichlet data.

    Function fields must be pure and accept numpy arrays in the spatial
    argument.  ``compatible_corners`` records whether the initial condition
    matches the boundary data at t0; the catalog deliberately includes an
    incompatible case.
    """

    nu: float
    f: Callable[[float, np.ndarray], np.ndarray]
    u0: Callable[[np.ndarray], np.ndarray]
    g_lo: Callable[[float], float]
    g_hi: Callable[[float], float]
    x_domain: tuple[float, float]
    t0: float
    t_final: float
    exact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    label: str = ""
    compatible_corners: bool = field(init=False, default=True)

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("diffusion coefficient must be positive")
        lo, hi = self.x_domain
        if not lo < hi:
            raise ValueError("degenerate spatial domain")
        if not self.t0 < self.t_final:
            raise ValueError("time interval must be nondegenerate")
        ok_lo = abs(float(self.u0(lo)) - float(self.g_lo(self.t0))) <= CORNER_TOL
        ok_hi = abs(float(self.u0(hi)) - float(self.g_hi(self.t0))) <= CORNER_TOL
        object.__setattr__(self, "compatible_corners", ok_lo and ok_hi)


@dataclass(frozen=True)
class CollocationGrid:
    """Interior collocation points plus the two boundary points."""

    interior: np.ndarray
    boundary: tuple[float, float]

    def __post_init__(self):
        pts = np.asarray(self.interior, dtype=float)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("grid needs at least one interior point")
        d = np.diff(pts)
        if pts.size > 1:
            if np.any(d <= 0):
                raise ValueError("interior points must be strictly increasing")
            if np.any(np.abs(d - d[0]) > 1e-12 * abs(d[0])):
                raise ValueError("interior points must be equispaced")
        lo, hi = self.boundary
        if np.any(pts <= lo) or np.any(pts >= hi):
            raise ValueError("interior points must lie strictly inside the boundary")
        pts.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.interior.size + 2


def _zero_source(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zero_bc(t):
    return 0.0


def problem_a(gamma: float = 3.0) -> ProblemSpec:
    """Two decaying sine modes on [0, 1]; stiff when gamma > 5.

    u0 = sin(pi x) + sin(gamma pi x), homogeneous Dirichlet, nu = 1.
    The gamma mode decays like exp(-gamma^2 pi^2 t), so large gamma makes
    rapidly decaying, oscillatory transients.
    """
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    g = float(gamma)

    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.sin(np.pi * x) + np.sin(g * np.pi * x)

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return (
            math.exp(-math.pi**2 * t) * np.sin(np.pi * x)
            + math.exp(-(g**2) * math.pi**2 * t) * np.sin(g * np.pi * x)
        )

    kind = "stiff" if g > 5 else "standard"
    return ProblemSpec(
        nu=1.0,
        f=_zero_source,
        u0=u0,
        g_lo=_zero_bc,
        g_hi=_zero_bc,
        x_domain=(0.0, 1.0),
        t0=0.0,
        t_final=1.0,
        exact=exact,
        label=f"a(gamma={g:g}) [{kind}]",
    )


def problem_b(n_terms: int = 20) -> ProblemSpec:
    """Unit initial state with zero boundary values on [0, 2] (incompatible corners).

    The exact solution is the sine series
    sum_n [1 - (-1)^n] (2 / n pi) sin(n pi x / 2) exp(-n^2 pi^2 t / 4),
    truncated at ``n_terms``; even terms vanish identically.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    odd = np.arange(1, n_terms + 1)
    odd = odd[odd % 2 == 1]
    coef = 4.0 / (odd * np.pi)
    decay = (odd * np.pi) ** 2 / 4.0

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        modes = np.sin(np.multiply.outer(x, odd) * (np.pi / 2.0))
        return modes @ (coef * np.exp(-decay * t))

    return ProblemSpec(
        nu=1.0,
        f=_zero_source,
        u0=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        g_lo=_zero_bc,
        g_hi=_zero_bc,
        x_domain=(0.0, 2.0),
        t0=0.0,
        t_final=1.2,
        exact=exact,
        label=f"b(terms={n_terms})",
    )


def problem_c() -> ProblemSpec:
    """Single sine mode with nu = 5: the solution decays very rapidly."""

    def exact(t, x):
        x = np.asarray(x, dtype=float)
        return math.exp(-5.0 * math.pi**2 * t) * np.sin(np.pi * x)

    return ProblemSpec(
        nu=5.0,
        f=_zero_source,
        u0=lambda x: np.sin(np.pi * np.asarray(x, dtype=float)),
        g_lo=_zero_bc,
        g_hi=_zero_bc,
        x_domain=(0.0, 1.0),
        t0=0.0,
        t_final=1.0,
        exact=exact,
        label="c",
    )


def make_grid(problem: ProblemSpec, n_interior: int) -> CollocationGrid:
    """Equispaced interior points x_lo + j h, j = 1..n, h = length/(n+1)."""
    if n_interior < 1:
        raise ValueError("n_interior must be >= 1")
    lo, hi = problem.x_domain
    h = (hi - lo) / (n_interior + 1)
    pts = lo + h * np.arange(1, n_interior + 1)
    return CollocationGrid(interior=pts, boundary=(lo, hi))


def default_interior_count(n_neurons: int, boundary_rows_in_m: bool = True) -> int:
    """Interior point count for the harness rule of N/2 collocation rows.

    With ``boundary_rows_in_m`` (the default) the two boundary rows count
    toward the N/2 total, giving N/2 - 2 interior points.  The alternative
    convention places N/2 points in the interior and appends the boundary
    rows on top; it is exposed for sensitivity checks only.
    """
    m = n_neurons // 2
    n_int = m - 2 if boundary_rows_in_m else m
    if n_int < 1:
        raise ValueError(f"n_neurons={n_neurons} leaves no interior collocation points")
    return n_int


_PROBLEM_RE = re.compile(r"^([abc])(?:\((.*)\))?$")


def get_problem(name: str, gamma: float | None = None, n_terms: int | None = None) -> ProblemSpec:
    """Resolve a catalog name like ``a``, ``a(gamma=3)``, ``b(terms=20)`` or ``c``.

    Explicit keyword arguments override values parsed from the name.
    """
    m = _PROBLEM_RE.match(name.strip().lower())
    if m is None:
        raise ValueError(f"unknown problem {name!r}; expected a, b or c")
    key, argstr = m.group(1), m.group(2)
    kwargs: dict[str, float] = {}
    if argstr:
        for part in argstr.split(","):
            k, _, v = part.partition("=")
            kwargs[k.strip()] = float(v)
    if key == "a":
        if gamma is None:
            gamma = kwargs.get("gamma", 3.0)
        return problem_a(gamma)
    if key == "b":
        if n_terms is None:
            n_terms = int(kwargs.get("terms", kwargs.get("n_terms", 20)))
        return problem_b(n_terms)
    if kwargs or gamma is not None or n_terms is not None:
        raise ValueError("problem c takes no parameters")
    return problem_c()
