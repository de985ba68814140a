"""Scenario and result file schemas."""
