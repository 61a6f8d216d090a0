"""Cavity-reservoir entanglement modules package."""
