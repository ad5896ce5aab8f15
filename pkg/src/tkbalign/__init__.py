"""Cost-optimal alignment of temporal ALC knowledge bases with temporal conjunctive queries."""

__version__ = "0.1.0"
