import math

import numpy as np
import pytest

from ncspectral.weyl import DeformationMatrix, FourierElement


GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture
def theta2():
    return DeformationMatrix.standard_block(2, 2.0 * math.pi * GOLDEN)


@pytest.fixture
def theta4():
    return DeformationMatrix.standard_block(4, 2.0 * math.pi * GOLDEN)


def reference_multiply(a: FourierElement, b: FourierElement, theta: DeformationMatrix):
    """Independent reference product: raw double loop, phase from the matrix.

    Phases are evaluated straight from the float bilinear form k . (Theta q)
    instead of the integer-minor contraction the package uses, so the two
    implementations share no code path.
    """
    out = {}
    th = np.asarray(theta.theta)
    for k, va in a.items():
        for q, vb in b.items():
            phase = -0.5 * float(np.asarray(k) @ th @ np.asarray(q))
            m = tuple(x + y for x, y in zip(k, q))
            out[m] = out.get(m, 0j) + va * vb * complex(math.cos(phase), math.sin(phase))
    return FourierElement(a.dim, out)


def random_element(rng, dim, terms=5, radius=3, scale=1.0):
    coeffs = {}
    for _ in range(terms):
        k = tuple(int(x) for x in rng.integers(-radius, radius + 1, size=dim))
        coeffs[k] = coeffs.get(k, 0j) + complex(rng.normal(), rng.normal()) * scale
    return FourierElement(dim, coeffs)
