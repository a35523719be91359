#!/usr/bin/env python3
"""Allow divrate to be run as: python -m divrate"""

import sys

from divrate.cli import main


if __name__ == "__main__":
    sys.exit(main())
