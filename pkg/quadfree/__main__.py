"""
Entry point for running quadfree as a module.

Allows running 'python -m quadfree' to access the CLI.
"""

from .ui.cli import main

if __name__ == "__main__":
    main()
