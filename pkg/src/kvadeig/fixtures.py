"""Built-in test problems."""

from __future__ import annotations

import numpy as np

from .linearization import QuadPencil


def mobile_manipulator() -> QuadPencil:
    """Linearized model of a two-dimensional three-link mobile manipulator (n = 5)."""
    m0 = np.array([[18.7532, -7.94493, 7.94494],
                   [-7.94493, 31.8182, -26.8182],
                   [7.94494, -26.8182, 26.8182]])
    c0 = np.array([[-1.52143, -1.55168, 1.55168],
                   [3.22064, 3.28467, -3.28467],
                   [-3.22064, -3.28467, 3.28467]])
    k0 = np.array([[67.4894, 69.2393, -69.2393],
                   [69.8124, 1.68624, -1.68617],
                   [-69.8123, -1.68617, -68.2707]])
    f0 = np.array([[1.0, 0.0, 0.0],
                   [0.0, 0.0, 1.0]])
    m = np.zeros((5, 5))
    c = np.zeros((5, 5))
    k = np.zeros((5, 5))
    m[:3, :3] = m0
    c[:3, :3] = c0
    k[:3, :3] = k0
    k[:3, 3:] = -f0.T
    k[3:, :3] = f0
    return QuadPencil(m, c, k)


FIXTURES = {"mobile_manipulator": mobile_manipulator}
