"""MOSUM change point detection for piecewise linear signals."""
