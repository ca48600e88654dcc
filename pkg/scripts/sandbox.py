"""Script to run the transit sandbox commands from a source checkout.

Equivalent to the ``transit-sandbox`` console script installed with the package, e.g.:

.. code-block:: bash

    python scripts/sandbox.py sweep --config b63_case_study --parallelism 4
"""

import sys

from transit_sandbox.scripts.sandbox import main

if __name__ == "__main__":
    # run the main function
    sys.exit(main())
