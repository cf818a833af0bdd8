"""Design-and-analysis workbench for detuned series-series IPT chargers."""

__version__ = "0.1.0"
