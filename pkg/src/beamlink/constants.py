"""Physical constants used by the channel and device models."""

SPEED_OF_LIGHT = 299792458.0        # m/s
BOLTZMANN = 1.380649e-23            # J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C

# Photodetector material constants for the bandwidth-area tradeoff.
# Vacuum permittivity carries the corrected negative exponent.
VACUUM_PERMITTIVITY = 8.854e-12     # F/m
SEMICONDUCTOR_RELATIVE_PERMITTIVITY = 12.0
CARRIER_SATURATION_VELOCITY = 1e5   # m/s

REFERENCE_TEMPERATURE = 296.15      # K, temperature at which data tables are defined
STANDARD_PRESSURE = 101325.0        # Pa
