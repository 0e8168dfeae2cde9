"""
Trial pipeline for sparls.

Runs independent Monte Carlo trials sequentially or in a bounded worker pool.
"""
