"""Figure rendering"""
