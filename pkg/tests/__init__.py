"""
Test Package

This package contains all test modules for ernst-theta.
"""
