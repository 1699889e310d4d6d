"""Wong-Zakai approximations of stochastic convective Brinkman-Forchheimer flow on the 2D torus."""

__version__ = "0.1.0"
