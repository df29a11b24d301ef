"""
Utility modules for the Markov-Krein numerics library
"""
