"""cave-sim: crowdsourced in-vehicle edge computing simulator.

An ego vehicle offloads passenger tasks to passing-by vehicles. The package
implements barrier-penalized particle swarm assignment with redundant replicas,
closed-form KKT compute allocation, two comparison schedulers and a
time-slotted simulator of the whole task lifecycle.
"""

__version__ = "0.1.0"
__author__ = "BSCE"
