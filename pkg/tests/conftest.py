"""Shared fixtures: independent reference quadrature and in-class integrands.

The reference integrator here is deliberately not the library's own
(single-shot composite Gauss at a fixed node count, no panel doubling), so
quadrature assertions compare two separate implementations.  The integrand
factory draws random members of the Holder class the oracles are specified
for, each with a closed-form integral.
"""

import dataclasses

import numpy as np
import pytest

# one composite Gauss rule, frozen: 16 points per panel
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)


def reference_integral(g, nodes=10_000):
    """Composite 16-point Gauss on [0,1] with about `nodes` total points."""
    panels = max(1, nodes // 16)
    edges = np.linspace(0.0, 1.0, panels + 1)
    width = 1.0 / panels
    pts = (edges[:-1, None] + (_GAUSS_X[None, :] + 1.0) * (width / 2.0)).ravel()
    vals = np.asarray(g(pts), dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    w = np.tile(_GAUSS_W * (width / 2.0), panels)
    return vals @ w


@dataclasses.dataclass(frozen=True)
class KinkIntegrand:
    """Member of the (r, rho) class: polynomial plus |u - tau|^(r+rho) kink.

    The polynomial part is smooth; the kink term has exactly r bounded
    derivatives with the r-th one rho-Holder, so the class membership is
    sharp.  `exact` is the closed-form integral over [0, 1].
    """

    coeffs: np.ndarray        # (deg+1, dim), ascending powers
    amp: np.ndarray           # (dim,)
    tau: np.ndarray           # (dim,)
    power: float              # r + rho

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __call__(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        poly = np.zeros((self.dim, u.size))
        for k in range(self.coeffs.shape[0] - 1, -1, -1):
            poly = poly * u[None, :] + self.coeffs[k][:, None]
        kink = self.amp[:, None] * np.abs(u[None, :] - self.tau[:, None]) ** self.power
        return poly + kink

    @property
    def exact(self) -> np.ndarray:
        ks = np.arange(self.coeffs.shape[0])
        poly_part = (self.coeffs / (ks + 1.0)[:, None]).sum(axis=0)
        s = self.power
        kink_part = self.amp * (self.tau ** (s + 1.0) + (1.0 - self.tau) ** (s + 1.0)) / (s + 1.0)
        return poly_part + kink_part


def make_kink_integrand(rng, r, rho, dim=1):
    """Random in-class integrand; coefficients in [-1, 1], kink away from edges."""
    deg = r + 2
    coeffs = rng.uniform(-1.0, 1.0, size=(deg + 1, dim))
    amp = rng.uniform(0.5, 1.0, size=dim)
    tau = rng.uniform(0.2, 0.8, size=dim)
    return KinkIntegrand(coeffs=coeffs, amp=amp, tau=tau, power=r + rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
