#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
WsRHS Energy Efficiency - Launcher

This script runs the command line of the wsrhs_ee package without installing it,
e.g. ``python run.py run data/json/siso_pmax_sweep.json --draws 10``.
"""

import logging
import sys

logger = logging.getLogger("launcher")

if __name__ == "__main__":
    try:
        from wsrhs_ee.main import main

        sys.exit(main())
    except ImportError as e:
        logger.error(f"Failed to import main function: {e}")
        print(f"Error: Could not start wsrhs_ee - {e}")
        print("Make sure the requirements are installed (pip install -r requirements.txt).")
        sys.exit(1)
