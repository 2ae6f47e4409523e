"""Image codecs and timing helpers."""
