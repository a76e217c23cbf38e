"""
Operator and test tooling: SQL shell, cluster launcher, benchmark driver,
snapshot-isolation history checker and tree walker.
"""
