#!/usr/bin/env python3
"""Entry point: ``python main.py <command> ...``; see ``--help``."""

from core.cli.app import main

if __name__ == "__main__":
    main()
