"""Unit conventions.

hbar = 1 throughout. Energies and rates are angular frequencies in rad/ns and
times are in ns. Quantities quoted as ``omega / 2pi = X MHz`` are stored as
``2 pi X * 1e-3`` rad/ns.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def mhz(value):
    """Convert ``value`` given as omega/2pi in MHz to rad/ns."""
    return TWO_PI * value * 1e-3


def ghz(value):
    """Convert ``value`` given as omega/2pi in GHz to rad/ns."""
    return TWO_PI * value


def to_mhz(omega):
    """Convert an angular frequency in rad/ns to omega/2pi in MHz."""
    return omega / TWO_PI * 1e3


def to_ghz(omega):
    return omega / TWO_PI
