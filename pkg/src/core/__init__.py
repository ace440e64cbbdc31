"""Numerical core: linear algebra, cost, dynamics, shooting"""
