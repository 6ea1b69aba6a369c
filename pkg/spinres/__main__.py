from spinres.main import main

main()
