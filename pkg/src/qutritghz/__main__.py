import sys

from qutritghz.cli import main

sys.exit(main())
