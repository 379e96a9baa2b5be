"""Test suite for nominal_ua"""
