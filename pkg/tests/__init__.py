"""Test suite for the fdelab numerical laboratory."""
