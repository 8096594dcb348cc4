"""Analytic immersions used by the catalog"""
