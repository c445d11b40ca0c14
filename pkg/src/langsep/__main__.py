import sys

from langsep.cli import main

sys.exit(main())
