"""Co-simulation of a cloud digital-twin wireless control loop.

Modules: plant dynamics, sensing fleet, extended Kalman estimation, Rician
uplink with closed-form bandwidth sizing, age-of-loop tracking, greedy
value-of-information scheduling, an actor-critic controller, and the
benchmark/metrics apparatus with a CLI.
"""

__version__ = "0.1.0"
