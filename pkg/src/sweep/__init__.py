# Parameter Sweep Components

