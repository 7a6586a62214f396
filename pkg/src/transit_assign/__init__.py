"""Multi-modal public transit traffic assignment."""
