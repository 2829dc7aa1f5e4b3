"""Position index over PGN corpora and empirical transition probabilities."""
