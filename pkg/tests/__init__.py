"""Tests package for the MIMO SWIPT optimizer."""
