"""Energy-aware clustering of mobile nodes with an artificial bee colony, plus LEACH/SEP baselines."""

__version__ = "0.1.0"
