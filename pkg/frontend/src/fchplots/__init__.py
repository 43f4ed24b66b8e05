"""Paper-style figures from fch experiment artifacts.

Reads the CSV/JSON files an `fch run` leaves behind and renders snapshots,
waterfalls, L-infinity histories, coefficient spectra with fitted decay
overlays, and solitary-wave families.  No numerics happen here beyond axis
transforms; everything plotted comes from the artifacts.
"""

from .render import ArtifactError, PlotSpec, render

__version__ = "0.1.0"

__all__ = ["ArtifactError", "PlotSpec", "render", "__version__"]
