"""Inter-agent link capacity model and its spatial gradient.

The rate of the link between two planar agents decays with their
separation:

    rate(p, q) = exp(-(||p - q|| / d0)**exponent)

with ``d0`` the characteristic decay length (km) and ``exponent`` the
fading shape.  The rate lies in (0, 1], equals 1 only when the agents
coincide, and is differentiable everywhere provided ``exponent >= 2``
(for smaller exponents the gradient is discontinuous at zero
separation, which would break the ascent step downstream).

Positions are length-2 float arrays in km throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CapacityModel:
    """Parameters of the distance-decay rate function.

    d0_km: decay length scale, must be positive.
    exponent: fading shape, must be >= 2 so the gradient is continuous
        at coincident positions.
    """

    d0_km: float = 1.0
    exponent: float = 2.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.d0_km) or self.d0_km <= 0.0:
            raise ValueError(f"d0_km must be positive and finite, got {self.d0_km}")
        if not np.isfinite(self.exponent) or self.exponent < 2.0:
            raise ValueError(
                f"exponent must be >= 2 for a continuous gradient, got {self.exponent}"
            )


def as_position(p) -> np.ndarray:
    """Coerce to a finite length-2 float64 array (km)."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (2,):
        raise ValueError(f"position must have shape (2,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"position components must be finite, got {arr}")
    return arr


def capacity(model: CapacityModel, p, q) -> float:
    """Link rate between positions ``p`` and ``q``, in (0, 1]."""
    d = float(np.linalg.norm(as_position(p) - as_position(q)))
    return float(np.exp(-((d / model.d0_km) ** model.exponent)))


def capacity_gradient(model: CapacityModel, p, q) -> np.ndarray:
    """Gradient of ``capacity(model, p, q)`` with respect to ``p``.

    Equals -(exponent / d0**exponent) * d**(exponent-2) * rate * (p - q),
    the zero vector at p = q (the limit for exponent >= 2).
    """
    diff = as_position(p) - as_position(q)
    d = float(np.linalg.norm(diff))
    if d == 0.0:
        return np.zeros(2)
    scale = -(model.exponent / model.d0_km**model.exponent) * d ** (model.exponent - 2.0)
    return scale * np.exp(-((d / model.d0_km) ** model.exponent)) * diff


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    """N x N matrix of Euclidean distances between row positions."""
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def capacity_matrix(model: CapacityModel, positions: np.ndarray) -> np.ndarray:
    """N x N symmetric rate matrix with a zero diagonal.

    Self-links carry no flow by convention, so the diagonal is zeroed
    rather than set to the coincident-point rate of 1.
    """
    d = pairwise_distances(positions)
    c = np.exp(-((d / model.d0_km) ** model.exponent))
    np.fill_diagonal(c, 0.0)
    return c


def gradient_factor_matrix(model: CapacityModel, positions: np.ndarray) -> np.ndarray:
    """N x N matrix G with grad_{x_i} rate(x_i, x_j) = G[i, j] * (x_i - x_j).

    G[i, j] = -(exponent / d0**exponent) * d_ij**(exponent-2) * rate(d_ij),
    with G[i, i] = 0.  Shared by the ascent direction assembly, which
    weights these factors by capacity-constraint duals.
    """
    d = pairwise_distances(positions)
    c = np.exp(-((d / model.d0_km) ** model.exponent))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = -(model.exponent / model.d0_km**model.exponent) * d ** (model.exponent - 2.0) * c
    # exponent == 2 leaves d**0 == 1 at d == 0; higher exponents produce 0/nan
    g = np.where(np.isfinite(g), g, 0.0)
    np.fill_diagonal(g, 0.0)
    return g
