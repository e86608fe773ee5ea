"""Zero-sum quadruples of squareful integers: exact counts and the
circle-method prediction for them."""

__version__ = "0.1.0"
