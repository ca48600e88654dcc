"""Script to print all the system designs of a configuration."""

import sys

from transit_sandbox.scripts.list_designs import main

if __name__ == "__main__":
    sys.exit(main())
