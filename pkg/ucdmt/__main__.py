# ucdmt/__main__.py

from ucdmt.main import main

main()
