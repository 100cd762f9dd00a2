# ABOUTME: Unit-test package marker.
# ABOUTME: Tests in this directory run in seconds on tiny grids and random toy instances.
