"""Free group words, quadratic equations, glued surfaces and certificates."""
