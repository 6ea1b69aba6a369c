#!/usr/bin/env python3
"""
spinres - Main Entry Point
Er spin ensemble / resonator toolkit
"""

from spinres.main import main

if __name__ == "__main__":
    main()
