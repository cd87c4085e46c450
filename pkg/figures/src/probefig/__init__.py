"""Figure renderer for isingprobe run outputs.

Strictly a presentation layer: it parses the run directories' CSV/JSON
contracts, never computes physics, and embeds each input's sha256 (verified
against the run manifest when present) in the image metadata and caption.
"""

__version__ = "0.1.0"

from .render import FigureSpec, SchemaMismatch, StaleInput, render

__all__ = ["FigureSpec", "SchemaMismatch", "StaleInput", "render", "__version__"]
