"""
Standalone entry point for the region-of-vulnerability sweep
"""

from .commands import sweep_cmd


def main():
    """Main entry point"""
    sweep_cmd.main(prog_name="evcs-sweep")


if __name__ == "__main__":
    main()
