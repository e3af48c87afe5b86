"""Symbolic models: exact arithmetic, operators, Hopf algebroids, twists and classical limits"""
