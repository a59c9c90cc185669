# Command-line Components

