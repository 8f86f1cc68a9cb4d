"""k-means clustering driven by extreme-value covering probabilities."""
