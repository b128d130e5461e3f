from disparidad.cli import main

main()
