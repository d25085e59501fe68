"""
LEO Orbit Planner

Learns low-Earth-orbit element sets that reach a ground target, stay inside an
altitude band and keep clear of catalogued orbits, using A2C and PPO agents
trained from scratch on a numpy actor-critic.
"""

__version__ = "1.0.0"
