"""Test suite for covsteer"""
