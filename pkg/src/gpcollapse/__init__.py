"""Ground states and collapse asymptotics of the 2D attractive
Gross-Pitaevskii functional with singular potentials."""

__version__ = "0.1.0"
