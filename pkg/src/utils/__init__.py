# Utility Components

