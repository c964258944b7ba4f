"""Command-line harness: config parsing, emission and subcommands."""
