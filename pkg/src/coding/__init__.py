# Random Linear Coding Components

