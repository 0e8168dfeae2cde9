"""
Port interfaces for sparls.

Abstract contracts for scenario generators and figure backends, implemented by
the adapters package.
"""
