"""
Test package for LeetCode Roadmap Generator.
"""
