"""UCI engine bridge: sessions, score types, evaluation cache and a mock engine."""
