import sys

from descontrol.cli import main

sys.exit(main())
