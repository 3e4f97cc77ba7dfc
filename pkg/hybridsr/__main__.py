"""Command line interface of the simulator."""

from .cli import main

main()
