# Storage Components

