"""
Unit conversions used by the scenario and power models.
"""

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def dbm_to_watts(dbm: float) -> float:
    """Convert a power level in dBm to Watts."""
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def watts_to_dbm(watts: float) -> float:
    """Convert a power in Watts to dBm."""
    return float(10.0 * np.log10(watts) + 30.0)


def db_to_linear(db: float) -> float:
    """Convert a power ratio in dB to linear scale."""
    return float(10.0 ** (db / 10.0))


def wavelength(carrier_freq: float) -> float:
    """Free-space wavelength in meters for a carrier frequency in Hz."""
    return SPEED_OF_LIGHT / carrier_freq
