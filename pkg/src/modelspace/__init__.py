"""Model-space exploration: finitely presented categories, C-sets, diagrams of models, and loss-guided selection."""
from . import petri  # registers the Petri schema for serialization

__version__ = "0.1.0"
