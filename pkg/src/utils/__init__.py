# Verifier Utils Package
