"""Great-circle distance on the WGS-ish sphere used throughout the package."""

from __future__ import annotations

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

# meters per degree of latitude on the sphere above
M_PER_DEG_LAT = EARTH_RADIUS_M * np.pi / 180.0


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters between two points in degrees.

    Accepts scalars or numpy arrays (broadcast together).

    >>> round(haversine_m(0.0, 0.0, 0.0, 1.0))
    111195
    """
    lat1 = np.radians(lat1)
    lon1 = np.radians(lon1)
    lat2 = np.radians(lat2)
    lon2 = np.radians(lon2)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))
