"""Desk-scale micro-AUV mission system.

Simulates a small two-man-portable survey AUV: mission planning (single
lines, lawnmower sites, circles), kinematic vehicle and sensor simulation,
heading/depth control with a backseat-driver override channel, dead-reckoned
navigation with GNSS-anchored track reconstruction, append-only mission
logging, and an HTTP control-station service.
"""

__version__ = "0.1.0"

# Nominal airframe metadata for the simulated vehicle class.
VEHICLE_INFO = {
    "class": "micro-auv",
    "base_length_m": 0.9,
    "weight_kg": 10.0,
    "crew": "two-man-portable",
}
