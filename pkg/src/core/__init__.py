"""
Core domain of sparls.

Penalties and proximal maps, the batch and streaming estimators, diagnostics
and metrics. Nothing here touches files or external services.
"""
