"""
WsRHS Energy Efficiency

Energy-efficiency maximization for MIMO links assisted by two nearly-passive
reconfigurable metasurfaces under global reflection constraints.
"""

__version__ = "0.1.0"
