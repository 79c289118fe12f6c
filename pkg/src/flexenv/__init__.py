"""Aggregate flexibility envelopes for radial distribution feeders.

Computes time-coupled upper/lower GCP power envelopes under generator
ramp limits (with an optional pre-ramping enhancement and robust voltage
margins), disaggregates any trajectory inside an envelope back to device
schedules by convex interpolation, and verifies the guarantee by Monte
Carlo sampling.
"""

__version__ = "0.1.0"
