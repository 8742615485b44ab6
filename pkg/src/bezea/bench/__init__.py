"""Benchmark harness: batch runs, indicators, statistics and result files."""
