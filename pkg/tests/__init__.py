"""Tests for the Killing-Poisson toolkit"""
