"""Company embeddings from webpage token corpora, peer-firm recommendation,
and an industry-prediction evaluation harness."""

__version__ = "0.1.0"
