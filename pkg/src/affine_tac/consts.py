# Defaults shared by the pipeline modules. Tolerances are relative to the scales named
# next to them.

# Seed grid points per parameter axis
seed_resolution = 64

# Newton iterations per seed
newton_max_iter = 50

# Gradient tolerance, scaled by |phi| * diameter
grad_tol = 1e-9

# |det Hess| below this marks a degenerate critical point. The Hessian is taken in chart
# parameters for the unit covector, so the value is sized for charts with O(1) parameter boxes
morse_tol = 1e-8

# Ambient dedup radius, relative to the diameter
dedup_radius = 1e-5

# Supporting hyperplane tolerance, relative to diameter * |nu|
supp_tol = 1e-7

# Smallest singular value allowed for df, and the relative hull rank cut-off
rank_tol = 1e-8
hull_rank_tol = 1e-9

# Finite-difference step relative to the chart domain diameter, and symmetry tolerance
fd_step = 1e-5
fd_tol = 1e-6

# Monte-Carlo sweep
sample_count = 500
max_rejection_rate = 0.5

# Width of the collar removed next to the singular ends of the Sigma charts
collar_width = 1e-3
