import sys

from geocume.cli import main

sys.exit(main())
