"""
Services for WsRHS Energy Efficiency

Channel synthesis, power and EE evaluation, the convex engines, the solvers,
oracles, the digital baseline and the Monte Carlo harness.
"""
