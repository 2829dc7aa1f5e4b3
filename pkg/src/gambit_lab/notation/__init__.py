"""FEN, SAN and PGN parsing and rendering."""
