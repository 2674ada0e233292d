"""Allow `python -m optomech` as an alias for the optomech console script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
