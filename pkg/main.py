#!/usr/bin/env python3
"""
vassclass
Main entry point for the command-line tool.
"""

from src.cli import main


if __name__ == "__main__":
    main()
