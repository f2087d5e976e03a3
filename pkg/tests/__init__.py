# Test Suite Package
