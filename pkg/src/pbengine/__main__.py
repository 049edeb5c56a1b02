import sys

from pbengine.cli import main

sys.exit(main())
