"""Allow ``python -m kcn`` as an alternative to the ``kcn`` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
