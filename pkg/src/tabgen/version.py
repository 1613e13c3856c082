"""Version information for tabgen."""

VERSION = "0.1.0"
