"""Hermitian gamma matrices, chirality, and the spinor conjugation matrix.

The construction is a fixed recursive tensor ladder: dimensions 1..3 use the
Pauli matrices directly and n -> n+2 tensors with them.  Everything downstream
that should not depend on the representation is only ever probed through
traces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["GammaSet", "build_gamma", "gamma_pair_symbol", "charge_conjugation"]

_SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)

MAX_DIM = 6


@dataclass(frozen=True)
class GammaSet:
    """n hermitian anticommuting matrices of size 2^m, m = floor(n/2).

    `chirality` is None for odd n.  `c0` satisfies c0 gamma^a = -epsilon
    gamma^a c0 for every a; epsilon and the sign of c0^2 are computed from the
    constructed matrices, not taken from a table.
    """

    n: int
    m: int
    gammas: tuple[np.ndarray, ...]
    chirality: np.ndarray | None
    c0: np.ndarray
    epsilon: int

    @property
    def spinor_dim(self) -> int:
        return 2 ** self.m

    def gamma(self, axis: int) -> np.ndarray:
        """Gamma matrix for a 1-based axis index."""
        if not 1 <= axis <= self.n:
            raise ValueError(f"axis {axis} out of range 1..{self.n}")
        return self.gammas[axis - 1]


def _frozen(mat: np.ndarray) -> np.ndarray:
    out = np.array(mat, dtype=complex)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def build_gamma(n: int) -> GammaSet:
    """Construct the gamma set for torus dimension 1 <= n <= 6."""
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"unsupported dimension {n}, supported range is 1..{MAX_DIM}")
    if n == 1:
        gammas = [np.array([[1.0]], dtype=complex)]
    elif n == 2:
        gammas = [_SIGMA1, _SIGMA2]
    elif n == 3:
        gammas = [_SIGMA1, _SIGMA2, _SIGMA3]
    elif n % 2 == 0:
        # even n from n-2: g^a -> g^a (x) s1, plus 1 (x) s2 and 1 (x) s3
        prev = build_gamma(n - 2)
        eye = np.eye(prev.spinor_dim, dtype=complex)
        gammas = [np.kron(g, _SIGMA1) for g in prev.gammas]
        gammas.append(np.kron(eye, _SIGMA2))
        gammas.append(np.kron(eye, _SIGMA3))
    else:
        # odd n: the even set one lower plus its chirality
        prev = build_gamma(n - 1)
        gammas = list(prev.gammas) + [prev.chirality]

    m = n // 2
    dim = 2 ** m
    chirality = None
    if n % 2 == 0:
        chi = ((-1j) ** m) * np.linalg.multi_dot(gammas) if n > 2 else \
            (-1j) * gammas[0] @ gammas[1]
        # strip the rounding dust so chirality is exactly hermitian
        chi = np.where(np.abs(chi.real) < 1e-14, 0.0, chi.real) \
            + 1j * np.where(np.abs(chi.imag) < 1e-14, 0.0, chi.imag)
        chirality = chi

    # For even n the chirality anticommutes with every gamma: epsilon = +1.
    # For odd n only scalars commute with the whole set (the product of all
    # gammas is central), so c0 is the identity and epsilon = -1.
    if n % 2 == 0:
        c0 = chirality
        epsilon = 1
    else:
        c0 = np.eye(dim, dtype=complex)
        epsilon = -1

    return GammaSet(
        n=n,
        m=m,
        gammas=tuple(_frozen(g) for g in gammas),
        chirality=_frozen(chirality) if chirality is not None else None,
        c0=_frozen(c0),
        epsilon=epsilon,
    )


def gamma_pair_symbol(a1: int, a2: int, gs: GammaSet) -> np.ndarray:
    """Antisymmetrized pair 1/2 (g^{a1} g^{a2} - g^{a2} g^{a1}), 1-based axes."""
    g1 = gs.gamma(a1)
    g2 = gs.gamma(a2)
    return 0.5 * (g1 @ g2 - g2 @ g1)


def charge_conjugation(n: int) -> tuple[np.ndarray, int]:
    """Return (c0, epsilon) with c0 g^a = -epsilon g^a c0 for all axes.

    Computed signs per dimension (c0^2 sign, epsilon): even n gives
    (+1, +1) with c0 the chirality; odd n gives (+1, -1) with c0 = 1.
    """
    gs = build_gamma(n)
    return gs.c0, gs.epsilon
