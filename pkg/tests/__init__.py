"""
posekit test suite
"""
