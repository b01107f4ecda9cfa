import sys

from cfmargin.main import main

sys.exit(main())
