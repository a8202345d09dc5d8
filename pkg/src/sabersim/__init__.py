"""sabersim: saber fencing strategy extraction and bout simulation.

Calibrates video-pixel to strip coordinates, embeds 20-frame motion windows,
clusters them into a 30-action skill vocabulary, fits priority-conditioned
distance-weighted transition models, and simulates touches in self-play,
against recorded sequences, or interactively against a human.
"""

__version__ = "0.1.0"
