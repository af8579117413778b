import sys

# local imports
from .harness.cli import main

sys.exit(main())
