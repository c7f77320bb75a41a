from tasks.generators import WEIGHT_SCHEMES

ALGORITHMS = [
    ("dsgd", "DSGD"),
    ("fedavg", "FedAvg (pas locaux)"),
]

SAMPLERS = [
    ("full", "Participation totale"),
    ("uniform", "Uniforme"),
    ("ocs", "OCS"),
    ("aocs", "AOCS"),
]

TASKS = [
    ("quadratic", "Quadratiques synthétiques"),
    ("logistic", "Régression logistique ℓ2"),
]

WEIGHT_SCHEME_CHOICES = [(scheme, scheme) for scheme in WEIGHT_SCHEMES]

CSV_COLUMNS = (
    "seed",
    "round",
    "suboptimality",
    "dist_sq",
    "sampled_count",
    "alpha",
    "gamma",
    "cumulative_uplink_bits",
)

# 2^-1 … 2^-5
DEFAULT_STEP_GRID = tuple(2.0**-k for k in range(1, 6))
MAX_GRID_EXTENSIONS = 4
