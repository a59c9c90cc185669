"""Main application entry point."""
import logging
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.cli.commands import main as run_command

logger = logging.getLogger("Main")


def main() -> int:
    """Run the command named on the command line."""
    try:
        return run_command()
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130
    except Exception as e:
        logger.exception(f"ERROR running command: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
