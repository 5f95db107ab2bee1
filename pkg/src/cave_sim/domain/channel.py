"""Analytic vehicle-to-vehicle link model.

Shannon rate over a distance-dependent path loss with a street-canyon-like
exponent, thermal noise plus receiver noise figure, shared equally by the flows
on the link. Deterministic given positions.
"""

import math

from cave_sim.domain.types import BitsPerSecond, Meters, Vec2

CARRIER_GHZ = 3.5
PATH_LOSS_INTERCEPT_DB = 32.4
PATH_LOSS_SLOPE_DB = 21.0  # 10 x exponent 2.1
NOISE_PSD_DBM_HZ = -174.0
NOISE_FIGURE_DB = 7.0
MIN_DISTANCE_M = 1.0


def path_loss_db(distance: Meters, excess_db: float = 0.0) -> float:
    """PL(dB) = 32.4 + 21 log10(d) + 20 log10(f_GHz) + excess, with d clamped to 1 m."""
    d = max(distance, MIN_DISTANCE_M)
    return (
        PATH_LOSS_INTERCEPT_DB
        + PATH_LOSS_SLOPE_DB * math.log10(d)
        + 20.0 * math.log10(CARRIER_GHZ)
        + excess_db
    )


def snr_db(
    distance: Meters, bandwidth: float, tx_power_dbm: float, excess_loss_db: float = 0.0
) -> float:
    noise_dbm = NOISE_PSD_DBM_HZ + 10.0 * math.log10(bandwidth) + NOISE_FIGURE_DB
    return tx_power_dbm - path_loss_db(distance, excess_loss_db) - noise_dbm


def link_rate(
    ego_pos: Vec2,
    vehicle_pos: Vec2,
    bandwidth: float,
    tx_power: float,
    concurrent_flows: int,
    excess_loss_db: float = 0.0,
) -> BitsPerSecond:
    """Per-flow Shannon rate between the ego and a vehicle.

    Args:
        ego_pos: Ego position (m)
        vehicle_pos: Vehicle position (m)
        bandwidth: Channel bandwidth (Hz)
        tx_power: Transmit power (dBm)
        concurrent_flows: Flows sharing the link; fewer than one counts as one
        excess_loss_db: Attenuation added to the distance path loss (dB)

    Returns:
        B log2(1 + SNR) / flows
    """
    distance = math.hypot(vehicle_pos[0] - ego_pos[0], vehicle_pos[1] - ego_pos[1])
    snr = 10.0 ** (snr_db(distance, bandwidth, tx_power, excess_loss_db) / 10.0)
    return bandwidth * math.log2(1.0 + snr) / max(1, concurrent_flows)
