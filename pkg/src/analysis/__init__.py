# Analytic Model Components

