# Ramsey Forge application
