import sys

from dsekit.cli import main

sys.exit(main())
