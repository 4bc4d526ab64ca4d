"""Network games with endogenous links: equilibria, stable outcomes and their structure."""

__version__ = "0.1.0"
