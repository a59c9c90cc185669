# Finite Field Components

