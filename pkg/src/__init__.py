"""vassclass: asymptotic complexity of VASS MDPs."""

__version__ = "1.0.0"
