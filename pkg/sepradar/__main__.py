import sys

from sepradar.main import main

sys.exit(main())
