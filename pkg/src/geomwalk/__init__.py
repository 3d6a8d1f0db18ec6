"""Random walks on random geometric graphs: a simulation laboratory.

Point-process sampling (Poisson, Matérn cluster, Matérn hardcore I/II),
geometric graph construction (Delaunay / Gabriel / creek-crossing), the
variable-speed random walk and its annealed diffusion constant, periodized
resistor networks with the diffusion-conductance identity, and the good-box
percolation machinery that cross-checks nondegeneracy.
"""
from .point_process import (ParameterError, PointConfig, ProcessSpec, Window,
                            ball_volume, estimate_deviation_probability,
                            estimate_void_probability, mcp_second_moment_density,
                            palm_version, sample, sample_mcp, sample_mhp1,
                            sample_mhp2, sample_ppp)
from .graphs import Graph, creek_crossing, degree_stats, delaunay, gabriel, voronoi_nucleus
from .delaunay import DegenerateInputError
from .walk import WalkPath, jump_chain, position_at, simulate_vsrw
from .diffusion import (MsdCurve, annealed_msd, fit_sigma2, gaussianity_check,
                        isotropy_check, local_drift_and_diffusivity)
from .resistor import (PeriodizedNetwork, ResistorNetwork, build_periodized,
                       crossing_lower_bound, diffusion_from_conductance,
                       effective_conductance, msd_on_network, series_parallel_oracle)
from .boxes import (BoxGrid, SiteField, classify_good, classify_nice,
                    connect_neighbors, count_disjoint_lr_crossings,
                    empirical_good_density, reference_vertex)
from .rng import child_rng

__version__ = "0.1.0"
