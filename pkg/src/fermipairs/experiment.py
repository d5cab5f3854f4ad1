"""Monte Carlo model of the stored-neutron coincidence experiment.

Neutrons leak from a storage vessel at rate N r c e (trapped count, times
hole-to-vessel area ratio, times wall-collision rate, times an efficiency
factor) and are detected in two analyzer arms.  Two emissions closer in
time than the coincidence window form a pair event: a true pair carries the
Fermi-gas pair spin state, an accidental pair carries independent
unpolarized spins.  Spin outcomes follow the Born rule at the active
analyzer setting, thinned by per-port detection efficiencies.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .fermi_gas import POINT_LIKE, DetectorProfile, PairQuery, pair_state
from .spin_algebra import maximally_mixed, pauli

__all__ = [
    "AnalyzerSetting",
    "SettingsPlanEntry",
    "ExperimentConfig",
    "CoincidenceEvent",
    "CountsRecord",
    "flux_estimate",
    "coincidence_rate_estimate",
    "born_probabilities",
    "sample_outcome",
    "simulate_run",
    "forced_pairs_record",
]

PORTS = (0, 1)  # 0 -> "+", 1 -> "-"
PORT_LABELS = ("+", "-")


def _as_unit_axis(axis, name: str) -> np.ndarray:
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or abs(norm - 1.0) > 1e-9:
        raise ValueError(f"{name} must be unit-norm, got |{name}| = {norm!r}")
    v = v / norm
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class AnalyzerSetting:
    """Analyzer axes for the two arms plus shared per-port efficiencies."""

    axis1: np.ndarray
    axis2: np.ndarray
    eta_plus: float = 1.0
    eta_minus: float = 1.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "axis1", _as_unit_axis(self.axis1, "axis1"))
        object.__setattr__(self, "axis2", _as_unit_axis(self.axis2, "axis2"))
        for name in ("eta_plus", "eta_minus"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {eta!r}")

    def port_efficiency(self, port: int) -> float:
        return self.eta_plus if port == 0 else self.eta_minus

    def to_dict(self) -> dict:
        return {
            "axis1": [float(c) for c in self.axis1],
            "axis2": [float(c) for c in self.axis2],
            "eta_plus": self.eta_plus,
            "eta_minus": self.eta_minus,
            "label": self.label,
        }


@dataclass(frozen=True)
class SettingsPlanEntry:
    """One analyzer setting together with its target coincidence count."""

    setting: AnalyzerSetting
    target: int

    def __post_init__(self):
        if self.target < 1:
            raise ValueError(f"target count must be >= 1, got {self.target!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulated run.

    Times are in seconds; the pair separation is dimensionless (units of
    1/k_f).  ``true_pair_fraction`` is the probability that a coincidence
    is a genuinely extracted pair rather than two independent neutrons;
    the storage physics does not pin it down, so it is a free knob.
    """

    n_trapped: int
    hole_ratio: float
    collision_rate: float
    efficiency: float
    window: float
    duration: float
    settings_plan: tuple
    pair_separation: float = 0.0
    profile: DetectorProfile = POINT_LIKE
    true_pair_fraction: float = 0.5
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        checks = [
            ("n_trapped", self.n_trapped >= 1),
            ("hole_ratio", 0.0 < self.hole_ratio <= 1.0),
            ("collision_rate", self.collision_rate > 0.0),
            ("efficiency", 0.0 < self.efficiency <= 1.0),
            ("window", self.window > 0.0),
            ("duration", self.duration >= 0.0),
            ("pair_separation", self.pair_separation >= 0.0),
            ("true_pair_fraction", 0.0 <= self.true_pair_fraction <= 1.0),
            ("settings_plan", len(self.settings_plan) > 0),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"invalid config field {name!r}: {getattr(self, name)!r}")
        return self

    def to_dict(self) -> dict:
        return {
            "n_trapped": self.n_trapped,
            "hole_ratio": self.hole_ratio,
            "collision_rate": self.collision_rate,
            "efficiency": self.efficiency,
            "window": self.window,
            "duration": self.duration,
            "pair_separation": self.pair_separation,
            "sigma": self.profile.sigma,
            "true_pair_fraction": self.true_pair_fraction,
            "seed": self.seed,
            "settings": [
                dict(entry.setting.to_dict(), target=entry.target)
                for entry in self.settings_plan
            ],
        }


@dataclass(frozen=True)
class CoincidenceEvent:
    """One recorded coincidence: time, true/accidental tag, joint ports, setting."""

    t: float
    kind: str  # "true" or "accidental"
    outcome: tuple  # (alpha, beta) with values +1 / -1
    setting_id: int


@dataclass
class CountsRecord:
    """Joint coincidence counts per setting plus per-arm singles.

    ``joint[k, a, b]`` counts coincidences at setting ``k`` with arm-1 port
    ``a`` and arm-2 port ``b`` (0 = "+", 1 = "-"); ``singles[arm, port]``
    counts every detection on that arm regardless of the partner arm.
    """

    settings: tuple
    joint: np.ndarray
    singles: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.joint = np.asarray(self.joint, dtype=np.int64)
        self.singles = np.asarray(self.singles, dtype=np.int64)
        if self.joint.shape != (len(self.settings), 2, 2):
            raise ValueError(
                f"joint counts must have shape ({len(self.settings)}, 2, 2), "
                f"got {self.joint.shape}"
            )
        if self.singles.shape != (2, 2):
            raise ValueError(f"singles must have shape (2, 2), got {self.singles.shape}")
        if np.any(self.joint < 0) or np.any(self.singles < 0):
            raise ValueError("counts must be non-negative")

    def setting_totals(self) -> np.ndarray:
        return self.joint.sum(axis=(1, 2))

    def total_coincidences(self) -> int:
        return int(self.joint.sum())


def flux_estimate(cfg: ExperimentConfig) -> float:
    """Emission rate N r c e in neutrons per second."""
    cfg.validate()
    return cfg.n_trapped * cfg.hole_ratio * cfg.collision_rate * cfg.efficiency


def coincidence_rate_estimate(cfg: ExperimentConfig) -> float:
    """Analytic coincidence rate flux^2 * window.

    Each emission finds a partner within the coincidence window with
    probability about flux * window, so pairs accumulate at
    flux * (flux * window) per second.  With 10^-3 neutrons per window and
    a 10^-4 s window this gives 10^-6 coincidences per counting, i.e.
    10^-2 per second, around 30 pairs per hour.
    """
    flux = flux_estimate(cfg)
    return flux * flux * cfg.window


def _port_projectors(axis: np.ndarray):
    n_dot_sigma = axis[0] * pauli(1) + axis[1] * pauli(2) + axis[2] * pauli(3)
    eye = np.eye(2, dtype=complex)
    return (0.5 * (eye + n_dot_sigma), 0.5 * (eye - n_dot_sigma))


def born_probabilities(rho: np.ndarray, setting: AnalyzerSetting) -> np.ndarray:
    """Joint outcome probabilities P[a, b] = Tr[rho (Pi_a (x) Pi_b)].

    Ports 0/1 are the +/- outcomes along each arm's axis; the four
    probabilities sum to 1 (detection thinning happens later).
    """
    rho = np.asarray(rho, dtype=complex)
    projs1 = _port_projectors(setting.axis1)
    projs2 = _port_projectors(setting.axis2)
    probs = np.empty((2, 2))
    for a in PORTS:
        for b in PORTS:
            probs[a, b] = np.trace(rho @ np.kron(projs1[a], projs2[b])).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_outcome(rho: np.ndarray, setting: AnalyzerSetting, rng):
    """Draw one joint spin outcome and the two detection flags.

    Returns (alpha, beta, seen1, seen2): alpha and beta are +1 or -1
    sampled from the Born probabilities, seen1/seen2 tell whether each
    arm's detector fired given its port efficiency.  A coincidence is
    recorded only when both flags are true.
    """
    probs = born_probabilities(rho, setting)
    idx = int(rng.choice(4, p=probs.ravel()))
    a, b = divmod(idx, 2)
    seen1 = bool(rng.random() < setting.port_efficiency(a))
    seen2 = bool(rng.random() < setting.port_efficiency(b))
    return 1 - 2 * a, 1 - 2 * b, seen1, seen2


def _draw_joint_counts(rho: np.ndarray, setting: AnalyzerSetting, n: int, rng) -> np.ndarray:
    """Vectorized Born sampling of ``n`` pairs at one setting; (2, 2) counts."""
    if n == 0:
        return np.zeros((2, 2), dtype=np.int64)
    probs = born_probabilities(rho, setting).ravel()
    draws = rng.choice(4, size=n, p=probs)
    return np.bincount(draws, minlength=4).reshape(2, 2).astype(np.int64)


def _thin_counts(cell_counts: np.ndarray, setting: AnalyzerSetting, rng):
    """Split Born counts into recorded coincidences and per-arm singles."""
    joint = np.zeros((2, 2), dtype=np.int64)
    singles = np.zeros((2, 2), dtype=np.int64)
    for a in PORTS:
        ea = setting.port_efficiency(a)
        for b in PORTS:
            eb = setting.port_efficiency(b)
            n_cell = int(cell_counts[a, b])
            both, only1, only2, _ = rng.multinomial(
                n_cell, [ea * eb, ea * (1 - eb), (1 - ea) * eb, (1 - ea) * (1 - eb)]
            )
            joint[a, b] += both
            singles[0, a] += both + only1
            singles[1, b] += both + only2
    return joint, singles


def forced_pairs_record(
    settings,
    pairs_per_setting: int,
    *,
    pair_separation: float = 0.0,
    profile: DetectorProfile = POINT_LIKE,
    true_pair_fraction: float = 1.0,
    seed: int = 0,
) -> CountsRecord:
    """Counts from a fixed number of pair events per setting, no timing model.

    Useful for statistics studies at count scales the hour-long bottle run
    cannot reach.  Each pair is true with probability
    ``true_pair_fraction`` (Fermi-gas pair state at the given separation)
    and accidental otherwise (independent unpolarized spins).
    """
    settings = tuple(settings)
    if not settings:
        raise ValueError("at least one analyzer setting is required")
    if pairs_per_setting < 0:
        raise ValueError(f"pairs_per_setting must be >= 0, got {pairs_per_setting!r}")
    if not 0.0 <= true_pair_fraction <= 1.0:
        raise ValueError(f"true_pair_fraction must be in [0, 1], got {true_pair_fraction!r}")
    rng = np.random.default_rng(seed)
    state_true = pair_state(PairQuery(pair_separation, profile))
    state_accidental = maximally_mixed()

    joint = np.zeros((len(settings), 2, 2), dtype=np.int64)
    singles = np.zeros((2, 2), dtype=np.int64)
    for k, setting in enumerate(settings):
        n_true = int(rng.binomial(pairs_per_setting, true_pair_fraction))
        cells = _draw_joint_counts(state_true, setting, n_true, rng)
        cells += _draw_joint_counts(
            state_accidental, setting, pairs_per_setting - n_true, rng
        )
        joint_k, singles_k = _thin_counts(cells, setting, rng)
        joint[k] = joint_k
        singles += singles_k

    metadata = {
        "kind": "forced-pairs",
        "pairs_per_setting": pairs_per_setting,
        "pair_separation": pair_separation,
        "sigma": profile.sigma,
        "true_pair_fraction": true_pair_fraction,
        "seed": seed,
    }
    return CountsRecord(settings=settings, joint=joint, singles=singles, metadata=metadata)


def simulate_run(cfg: ExperimentConfig):
    """Simulate one storage-and-count run; returns (CountsRecord, events).

    Emissions form a Poisson process whose rate N r c e is recomputed
    after every emission (each one depletes the trapped population).  An
    emission opens a coincidence gate of length ``cfg.window``: exactly
    one further emission inside the gate makes a pair event, a lone
    emission is a single, three or more in one gate are discarded.  The
    two members of a pair are routed to opposite arms; antibunching at
    the splitter is folded into the efficiency factor rather than
    modeled.  Settings advance once their target coincidence count is
    reached; the last setting absorbs any surplus.  Fixed seed implies
    identical output.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    state_true = pair_state(PairQuery(cfg.pair_separation, cfg.profile))
    state_accidental = maximally_mixed()
    rate_per_neutron = cfg.hole_ratio * cfg.collision_rate * cfg.efficiency

    n_settings = len(cfg.settings_plan)
    joint = np.zeros((n_settings, 2, 2), dtype=np.int64)
    singles = np.zeros((2, 2), dtype=np.int64)
    events: list = []

    setting_idx = 0
    tally = 0
    counters = {
        "emitted": 0,
        "lone_singles": 0,
        "pair_events": 0,
        "true_pairs": 0,
        "accidental_pairs": 0,
        "recorded_coincidences": 0,
        "discarded_groups": 0,
    }

    def flush(group_t: float, group_size: int):
        nonlocal setting_idx, tally
        if group_size == 1:
            counters["lone_singles"] += 1
            arm = int(rng.integers(2))
            port = int(rng.integers(2))  # unpolarized: both ports equally likely
            setting = cfg.settings_plan[setting_idx].setting
            if rng.random() < setting.port_efficiency(port):
                singles[arm, port] += 1
            return
        if group_size >= 3:
            counters["discarded_groups"] += 1
            return
        counters["pair_events"] += 1
        is_true = rng.random() < cfg.true_pair_fraction
        kind = "true" if is_true else "accidental"
        counters["true_pairs" if is_true else "accidental_pairs"] += 1
        setting = cfg.settings_plan[setting_idx].setting
        alpha, beta, seen1, seen2 = sample_outcome(
            state_true if is_true else state_accidental, setting, rng
        )
        a, b = (1 - alpha) // 2, (1 - beta) // 2
        if seen1:
            singles[0, a] += 1
        if seen2:
            singles[1, b] += 1
        if seen1 and seen2:
            joint[setting_idx, a, b] += 1
            counters["recorded_coincidences"] += 1
            events.append(
                CoincidenceEvent(t=group_t, kind=kind, outcome=(alpha, beta),
                                 setting_id=setting_idx)
            )
            tally += 1
            if tally >= cfg.settings_plan[setting_idx].target and setting_idx < n_settings - 1:
                setting_idx += 1
                tally = 0

    t = 0.0
    n_left = int(cfg.n_trapped)
    group_t = None
    group_size = 0
    while n_left > 0:
        rate = n_left * rate_per_neutron
        t += rng.exponential(1.0 / rate)
        if t > cfg.duration:
            break
        n_left -= 1
        counters["emitted"] += 1
        if group_t is not None and t < group_t + cfg.window:
            group_size += 1
        else:
            if group_t is not None:
                flush(group_t, group_size)
            group_t, group_size = t, 1
    if group_t is not None:
        flush(group_t, group_size)

    metadata = {
        "kind": "simulated-run",
        "config": cfg.to_dict(),
        "realized_duration": cfg.duration,
        "neutrons_remaining": n_left,
        **counters,
    }
    record = CountsRecord(
        settings=tuple(entry.setting for entry in cfg.settings_plan),
        joint=joint,
        singles=singles,
        metadata=metadata,
    )
    return record, events
