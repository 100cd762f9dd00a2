# ABOUTME: Acceptance-suite package marker.
# ABOUTME: Full solver runs on the 17x17 model problem and larger quadratic + L1 instances; marked `acceptance` and `slow`.
