# Monte Carlo Components

