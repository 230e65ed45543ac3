import sys

from structglrt.cli import main

sys.exit(main())
