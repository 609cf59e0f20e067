"""Random sigmoid feature sets (ELM hidden layer) on a 1-D interval.

The trial space is spanned by N logistic sigmoids with randomly drawn
internal weights and biases.  Internal parameters live in coordinates
normalized to the unit interval; evaluation maps physical points through
the affine change of variables and applies the chain rule per derivative
order, so sampling statistics do not depend on the physical domain length.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import expit


@dataclass(frozen=True)
class ElmBasis:
    """N fixed sigmoid features sigma(alpha_i * x~ + beta_i) on [x_lo, x_hi].

    ``alphas`` and ``betas`` are expressed in normalized coordinates
    x~ = (x - x_lo) / (x_hi - x_lo).  The triple (n_neurons, domain, seed)
    fully determines the parameters; see :func:`sample_basis`.
    """

    n_neurons: int
    alphas: np.ndarray
    betas: np.ndarray
    domain: tuple[float, float]
    seed: int

    def __post_init__(self):
        if self.n_neurons < 1:
            raise ValueError("n_neurons must be >= 1")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"degenerate domain [{lo}, {hi}]")
        if self.alphas.shape != (self.n_neurons,) or self.betas.shape != (self.n_neurons,):
            raise ValueError("alphas/betas must both have length n_neurons")
        if np.any(self.alphas == 0.0):
            raise ValueError("internal weights must be nonzero")
        # freeze the arrays so shared concurrent reads are safe
        self.alphas.setflags(write=False)
        self.betas.setflags(write=False)

    @property
    def centers(self) -> np.ndarray:
        """Sigmoid inflection points -beta_i/alpha_i in normalized coordinates."""
        return -self.betas / self.alphas

    @property
    def length(self) -> float:
        lo, hi = self.domain
        return hi - lo

    def eval(self, deriv_order: int, x) -> np.ndarray:
        """Evaluate all features (or a spatial derivative) at ``x``.

        Parameters
        ----------
        deriv_order : {0, 1, 2}
            Order of the spatial derivative in physical coordinates.
        x : float or array_like
            Point(s) inside the domain.

        Returns
        -------
        ndarray of shape ``(N,)`` for scalar ``x``, else ``x.shape + (N,)``.
        """
        if deriv_order not in (0, 1, 2):
            raise ValueError(f"deriv_order must be 0, 1 or 2, got {deriv_order}")
        lo, hi = self.domain
        x = np.asarray(x, dtype=float)
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise ValueError(f"evaluation point outside domain [{lo}, {hi}]")
        xt = (x - lo) / self.length
        z = np.multiply.outer(xt, self.alphas) + self.betas
        s = expit(z)
        if deriv_order == 0:
            return s
        # chain rule: d/dx = (1/length) d/dx~ per derivative order
        at = self.alphas / self.length
        if deriv_order == 1:
            return at * s * (1.0 - s)
        return at**2 * s * (1.0 - s) * (1.0 - 2.0 * s)

    def network_value(self, weights: np.ndarray, x) -> float | np.ndarray:
        """Evaluate the network sum_i w_i sigma_i at ``x``."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (self.n_neurons,):
            raise ValueError(f"weights must have length {self.n_neurons}, got shape {weights.shape}")
        return self.eval(0, x) @ weights

    def parameter_digest(self) -> str:
        """Short hash of the sampled parameters, for reproducibility records."""
        h = hashlib.sha256()
        h.update(self.alphas.tobytes())
        h.update(self.betas.tobytes())
        return h.hexdigest()[:16]


def internal_weight_halfrange(n_neurons: int) -> float:
    """Half-width of the uniform law for the internal weights, (N-10)/10 + 4."""
    return (n_neurons - 10) / 10 + 4


def sample_basis(n_neurons: int, domain: tuple[float, float], seed: int) -> ElmBasis:
    """Draw a reproducible random sigmoid basis.

    Internal weights are uniform on ``[-r, r]`` with ``r = (N-10)/10 + 4`` in
    normalized coordinates; a draw of exactly zero is rejected and redrawn
    (a zero weight would give a constant feature with no center).  Biases
    place each sigmoid's center uniformly in the normalized domain, so every
    feature is non-flat on the interval.  The generator is NumPy's PCG64,
    so identical ``(n_neurons, domain, seed)`` give bitwise-identical bases
    on any platform.
    """
    if n_neurons < 1:
        raise ValueError("n_neurons must be >= 1")
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise ValueError(f"degenerate domain [{lo}, {hi}]")

    rng = np.random.default_rng(seed)
    half = internal_weight_halfrange(n_neurons)
    alphas = rng.uniform(-half, half, n_neurons)
    while np.any(alphas == 0.0):
        zero = alphas == 0.0
        alphas[zero] = rng.uniform(-half, half, int(zero.sum()))
    centers = rng.uniform(0.0, 1.0, n_neurons)
    betas = -alphas * centers
    return ElmBasis(n_neurons=n_neurons, alphas=alphas, betas=betas, domain=(lo, hi), seed=int(seed))
