from convscale.cli import main

main()
