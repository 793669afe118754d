import sys

from mixmrrr.cli import main

sys.exit(main())
