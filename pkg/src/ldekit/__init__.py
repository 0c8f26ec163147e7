"""ldekit: four small modeling languages on one typed graph-model core."""

__version__ = "0.1.0"
