# Tests for evcs-attack
