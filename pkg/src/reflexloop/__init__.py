"""reflexloop: noise-seeded persona dynamics and stylometric analysis.

Submodules
----------
noise        ASCII noise-field generation and statistics
seedex       persona-seed and phase-parameter extraction
textmetrics  per-text linguistic metrics (rhythm, punctuation, entropy, ...)
lexicons     marker word lists and weight tables
emospace     emotional vector space: axes, distances, classification, dynamics
reflex       fluctuation, reflexive memory, resonance, persona updates
cycles       phase classification, cycle detection, drift tracking
generator    mock text generator, prompt builder, chat-completion adapter
session      experiment orchestration, logging, sweeps, export
"""

__version__ = "0.1.0"
