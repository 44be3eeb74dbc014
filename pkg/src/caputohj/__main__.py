"""`python -m caputohj` entry point."""

import sys

from caputohj.cli import main

if __name__ == "__main__":
    sys.exit(main())
