"""
Parameter presets for sparls experiments.
"""
