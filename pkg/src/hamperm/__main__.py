from hamperm.cli import main

main()
