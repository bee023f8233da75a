"""Tests for wlan-mab."""
