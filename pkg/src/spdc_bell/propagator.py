"""Two-crystal parametric (Bogoliubov) transformation and its exact second moments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phase_space import Coupling, ModeAmplitudes, Ordering

# Mode order used by every matrix in this package.
S_H, S_V, I_H, I_V = range(4)


@dataclass(frozen=True)
class SecondMoments:
    """Nonzero pair correlations after both crystals.

    ``n_mode`` is <a_j* a_j> (identical for all four modes) and ``c_pair`` is
    the signal-idler anomalous correlation <a^s_k a^i_k> for k = H, V.
    """

    n_mode: float
    c_pair: float
    epsilon: float

    def normal_matrix(self) -> np.ndarray:
        """<a_m* a_n> over the four modes."""
        return self.n_mode * np.eye(4)

    def anomalous_matrix(self) -> np.ndarray:
        """<a_m a_n> over the four modes."""
        m = np.zeros((4, 4))
        m[S_H, I_H] = m[I_H, S_H] = self.c_pair
        m[S_V, I_V] = m[I_V, S_V] = self.c_pair
        return m


def _crystal(signal, idler, g_tau: float):
    c, s = math.cosh(g_tau), math.sinh(g_tau)
    return c * signal + s * np.conj(idler), c * idler + s * np.conj(signal)


def propagate_h(modes: ModeAmplitudes, coupling) -> ModeAmplitudes:
    """First crystal: only the horizontally polarized pair is amplified."""
    g = Coupling.coerce(coupling).g_tau
    s_h, i_h = _crystal(modes.s_h, modes.i_h, g)
    return ModeAmplitudes(s_h, modes.s_v, i_h, modes.i_v)


def propagate_v(modes: ModeAmplitudes, coupling) -> ModeAmplitudes:
    """Second crystal: only the vertically polarized pair is amplified."""
    g = Coupling.coerce(coupling).g_tau
    s_v, i_v = _crystal(modes.s_v, modes.i_v, g)
    return ModeAmplitudes(modes.s_h, s_v, modes.i_h, i_v)


def propagate(modes: ModeAmplitudes, coupling) -> ModeAmplitudes:
    """Closed-form solution of the linear Langevin equations through both crystals.

    Each output signal amplitude is ``cosh(g tau)`` times the input signal
    plus ``sinh(g tau)`` times the conjugated input idler of the same
    polarization, and symmetrically for the idler.
    """
    g = Coupling.coerce(coupling).g_tau
    s_h, i_h = _crystal(modes.s_h, modes.i_h, g)
    s_v, i_v = _crystal(modes.s_v, modes.i_v, g)
    if np.ndim(s_h) == 0:
        return ModeAmplitudes(complex(s_h), complex(s_v), complex(i_h), complex(i_v))
    return ModeAmplitudes(s_h, s_v, i_h, i_v)


def analytic_second_moments(coupling, ordering) -> SecondMoments:
    g = Coupling.coerce(coupling).g_tau
    eps = Ordering.parse(ordering).epsilon
    return SecondMoments(
        n_mode=eps / 2 + math.sinh(g) ** 2,
        c_pair=0.5 * math.sinh(2 * g),
        epsilon=eps,
    )
