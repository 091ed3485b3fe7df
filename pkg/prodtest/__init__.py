"""
prodtest - numerical companion for testing bipartite versus multipartite productness
of pure multipartite quantum states.
"""

__version__ = "1.0.0"
