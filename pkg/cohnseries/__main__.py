#!/usr/bin/env python3
"""
命令行入口: python -m cohnseries <子命令> ...
"""

import sys

from cohnseries.cli import main

if __name__ == "__main__":
    sys.exit(main())
