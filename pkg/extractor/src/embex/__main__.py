import sys

from embex.cli import main

sys.exit(main())
