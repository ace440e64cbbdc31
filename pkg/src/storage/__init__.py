"""Trajectory persistence"""
