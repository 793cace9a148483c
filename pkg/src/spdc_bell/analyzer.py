"""Half-wave plate + PBS polarization analysis of signal and idler beams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phase_space import MeasurementSetting, ModeAmplitudes

PORTS = ("s_plus", "s_minus", "i_plus", "i_minus")


@dataclass(frozen=True)
class PortAmplitudes:
    s_plus: complex | np.ndarray
    s_minus: complex | np.ndarray
    i_plus: complex | np.ndarray
    i_minus: complex | np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.s_plus, self.s_minus, self.i_plus, self.i_minus)).astype(complex)


def rotation(angle: float) -> np.ndarray:
    """Maps (a_H, a_V) to (a_+, a_-) for an analyzer set at ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]])


def port_matrix(setting: MeasurementSetting) -> np.ndarray:
    """4x4 real orthogonal map from (s_h, s_v, i_h, i_v) to the detector ports."""
    r = np.zeros((4, 4))
    r[:2, :2] = rotation(setting.theta)
    r[2:, 2:] = rotation(setting.phi)
    return r


def analyze(modes: ModeAmplitudes, setting: MeasurementSetting) -> PortAmplitudes:
    ct, st = math.cos(setting.theta), math.sin(setting.theta)
    cp, sp = math.cos(setting.phi), math.sin(setting.phi)
    ports = (
        modes.s_h * ct + modes.s_v * st,
        modes.s_v * ct - modes.s_h * st,
        modes.i_h * cp + modes.i_v * sp,
        modes.i_v * cp - modes.i_h * sp,
    )
    if np.ndim(ports[0]) == 0:
        ports = tuple(complex(p) for p in ports)
    return PortAmplitudes(*ports)
