import sys

from maxtail.cli import main

sys.exit(main())
