"""Q&A over article-structured labor legislation, plus its evaluation harness."""

__version__ = "0.1.0"
