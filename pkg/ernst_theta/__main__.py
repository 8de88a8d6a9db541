"""``python -m ernst_theta`` entry point."""

from ernst_theta.cli import main

if __name__ == "__main__":
    main()
