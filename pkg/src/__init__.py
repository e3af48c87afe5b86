# Quantum Groupoid Verification Package
__version__ = "0.3.0"
