#!/usr/bin/env python
# -*- encoding: utf-8
"""
Command-line entry point; see ``parlsm.cli`` for the options.
"""

import sys

from parlsm.cli import main


if __name__ == '__main__':
    sys.exit(main())
