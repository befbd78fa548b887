import sys

from binspec.cli import main

sys.exit(main())
