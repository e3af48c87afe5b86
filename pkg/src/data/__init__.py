# Verifier Data Package
