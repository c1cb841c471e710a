"""
EvoPref: quality-diversity evolution of low-rank genomes on synthetic
multi-objective preference landscapes, with the baselines and statistics
needed to compare it against gradient and multi-objective optimizers.
"""

__version__ = "1.0.0"
