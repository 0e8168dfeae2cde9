"""
Adapters for sparls.

Concrete scenario generators (Jakes fading, Volterra, spline forecasting) and
the optional matplotlib plotter.
"""
