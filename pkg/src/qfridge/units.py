"""Physical constants and unit conventions.

Energies and rates are stored as ordinary frequencies in GHz (the E/2pi
numbers quoted for superconducting and optical setups). Superoperators are
assembled in angular units of s^-1 so that time grids are plain seconds.
"""

import math

PLANCK = 6.62607015e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
BOLTZMANN = 1.380649e-23  # J / K

#: k_B / h expressed in GHz per kelvin.
KB_OVER_H_GHZ = 20.836619

GHZ = 1e9
TWO_PI = 2.0 * math.pi

#: Multiply an ordinary frequency in GHz to get an angular rate in s^-1.
ANGULAR_PER_GHZ = TWO_PI * GHZ


def ghz_to_kelvin(nu):
    """Energy h*nu expressed as a temperature (h*nu/k_B), nu in GHz."""
    return nu / KB_OVER_H_GHZ


def quantum_energy(nu):
    """Energy of one quantum h*nu in joules, nu in GHz."""
    return PLANCK * nu * GHZ
