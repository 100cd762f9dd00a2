# ABOUTME: Property-suite package marker.
# ABOUTME: Hypothesis-driven checks of prox, gradient-mapping and criteria inequalities; marked `properties`.
