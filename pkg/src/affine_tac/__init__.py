"""Equiaffine immersions and their total absolute curvature"""
