"""Global placement: objective assembly, schedules and the estimator front end."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import constraints as cons
from .arrays import DesignArrays, design_arrays
from .density import DensityGrid, DensityParams, FillerSet, augmented, make_fillers, overflow
from .geometry import count_crossings
from .netlist import Design, NetlistError, load_design, parse_design
from .optimizer import DivergenceError, make_optimizer
from .spacing import SpacingParams, congestion, inflate_for_ports, net_spacing, spacing_penalty
from .wirelength import WirelengthParams, gamma_schedule, scatter_pin_grad, wirelength

LAMBDA_GROWTH = 1.05
LAMBDA_CAP_PER_100 = 10.0
INIT_JITTER = 0.02


@dataclass
class RunConfig:
    seed: int = 0
    iters: int = 1500
    init: str = "center-random"
    # wirelength
    wl: str = "coswa"
    alpha: float = 1.4
    gamma0: float | None = None
    angle_margin: float = 0.0
    theta2_raw: bool = False
    # spacing
    spacing: str = "full"
    lambda_ns: float = 1.0
    spacing_refresh: int = 100
    spacing_literal: bool = False
    # density
    target_density: float = 1.0
    grid: int | None = None
    rho: float = 2000.0
    overflow_stop: float = 0.07
    density_weight: float | None = None
    # optimizer
    optimizer: str = "bnag"
    eta0: float = 1.0
    eta_min: float = 0.1
    # constraints
    s0: float = 0.05
    sT: float = 1.0
    snapshot_every: int = 10

    def __post_init__(self):
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.init not in ("center-random", "manual"):
            raise ValueError("init must be center-random or manual")


@dataclass
class PlacementState:
    """Movable lower-left corners plus filler positions.

    As an optimizer vector the layout is ``[mov_x, mov_y, fill_x, fill_y]``.
    """

    movable: np.ndarray
    fillers: np.ndarray
    filler_size: tuple[float, float] = (0.0, 0.0)
    iteration: int = 0
    seed: int = 0

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.movable[:, 0], self.movable[:, 1], self.fillers[:, 0], self.fillers[:, 1]])

    def with_vector(self, vec: np.ndarray, iteration: int | None = None) -> "PlacementState":
        nm, nf = len(self.movable), len(self.fillers)
        mov = np.stack([vec[:nm], vec[nm:2 * nm]], axis=1)
        fil = np.stack([vec[2 * nm:2 * nm + nf], vec[2 * nm + nf:]], axis=1)
        return PlacementState(mov, fil, self.filler_size, self.iteration if iteration is None else iteration,
                              self.seed)

    def blocks(self) -> list[np.ndarray]:
        nm, nf = len(self.movable), len(self.fillers)
        edges = np.cumsum([0, nm, nm, nf, nf])
        return [np.arange(edges[i], edges[i + 1]) for i in range(4)]


def _to_xy(vec: np.ndarray, nm: int, nf: int):
    return (np.stack([vec[:nm], vec[nm:2 * nm]], axis=1),
            np.stack([vec[2 * nm:2 * nm + nf], vec[2 * nm + nf:]], axis=1))


def _from_xy(mov: np.ndarray, fil: np.ndarray) -> np.ndarray:
    return np.concatenate([mov[:, 0], mov[:, 1], fil[:, 0], fil[:, 1]])


def hpwl(pins: np.ndarray) -> float:
    if len(pins) == 0:
        return 0.0
    return float(np.sum(np.abs(pins[:, 1] - pins[:, 0])))


class Objective:
    """Wirelength + spacing penalty + augmented density over the placement vector."""

    def __init__(self, design: Design, config: RunConfig, fillers: FillerSet):
        self.design = design
        self.config = config
        self.arrays: DesignArrays = design_arrays(design)
        a = self.arrays
        self.nm = a.n_movable
        self.nf = fillers.count
        self.grid = DensityGrid.for_design(design, config.grid)
        self.wl = WirelengthParams(gamma_schedule(1.0, self.grid.bin_size, config.gamma0), config.alpha,
                                   config.angle_margin, config.wl, config.theta2_raw)
        self.sp = SpacingParams(config.lambda_ns, config.spacing_refresh, config.spacing_refresh,
                                config.spacing, config.spacing_literal)
        self.dp = DensityParams(config.grid, config.target_density, config.rho, 0.0, config.overflow_stop)
        self.density_weight = 0.0
        halo = a.halo.copy()
        if self.sp.variant == "pi":
            halo = halo + inflate_for_ports(design)
        self.rect_size = np.vstack([a.size, np.tile([fillers.width, fillers.height], (self.nf, 1))])
        self.rect_halo = np.concatenate([halo, np.zeros(self.nf)])
        self.comp_halo = halo
        self.movable_area = float(np.sum(np.prod(a.size[a.movable], axis=1)))
        self.norm = max(self.movable_area, 1e-12) ** 2
        self.r_cong = np.zeros(a.n_nets)
        self.spacing_s, self.spacing_which = net_spacing(a.pin_pnum, design.tech, self.r_cong, self.sp.variant)

    # ------------------------------------------------------------------ pieces

    def full_xy(self, mov: np.ndarray) -> np.ndarray:
        return self.arrays.full_positions(mov)

    def pins(self, mov: np.ndarray) -> np.ndarray:
        return self.arrays.pins(self.full_xy(mov))

    def refresh_congestion(self, mov: np.ndarray) -> int:
        total, per_net = count_crossings(self.pins(mov))
        self.r_cong = congestion(per_net, self.design.tech)
        self.spacing_s, self.spacing_which = net_spacing(self.arrays.pin_pnum, self.design.tech, self.r_cong,
                                                         self.sp.variant)
        return total

    def set_gamma(self, ovf: float) -> None:
        self.wl.gamma = gamma_schedule(ovf, self.grid.bin_size, self.config.gamma0)

    def component_density(self, mov: np.ndarray) -> np.ndarray:
        return self.grid.bin_density(self.full_xy(mov), self.arrays.size, self.comp_halo)

    def overflow(self, mov: np.ndarray) -> float:
        return overflow(self.component_density(mov), self.dp.target_density, self.grid.bin_area, self.movable_area)

    def terms(self, vec: np.ndarray):
        """Each objective term with its gradient on the full vector."""
        a = self.arrays
        mov, fil = _to_xy(vec, self.nm, self.nf)
        xy = self.full_xy(mov)
        pins = a.pins(xy)
        wl_val, wl_pin = wirelength(pins, a.pin_dir, a.weight, self.wl)
        sp_val, sp_pin = spacing_penalty(pins, a.pin_dir, self.spacing_s, self.spacing_which, self.sp)
        g_wl = scatter_pin_grad(wl_pin, a.pin_comp, a.n)[a.movable]
        g_sp = scatter_pin_grad(sp_pin, a.pin_comp, a.n)[a.movable]
        rects = np.vstack([xy, fil])
        d_val, d_grad, _ = self.grid.energy_and_grad(rects, self.rect_size, self.rect_halo, self.norm)
        g_d = np.vstack([d_grad[:a.n][a.movable], d_grad[a.n:]])
        zeros_f = np.zeros((self.nf, 2))
        return {
            "wirelength": (wl_val, _from_xy(g_wl, zeros_f)),
            "spacing": (sp_val, _from_xy(g_sp, zeros_f)),
            "density": (d_val, _from_xy(g_d[:self.nm], g_d[self.nm:])),
        }

    def __call__(self, vec: np.ndarray):
        t = self.terms(vec)
        wl_val, g_wl = t["wirelength"]
        sp_val, g_sp = t["spacing"]
        d_val, g_d = t["density"]
        dv, dg = augmented(d_val, g_d, self.density_weight, self.dp.rho)
        return wl_val + sp_val + dv, g_wl + g_sp + dg

    def init_density_weight(self, vec: np.ndarray) -> float:
        t = self.terms(vec)
        d_val, g_d = t["density"]
        # balance against the augmented gradient: with rho = 2000 the raw-energy
        # balance makes density outweigh wirelength by ~1 + rho * D at the start
        _, g_d = augmented(d_val, g_d, 1.0, self.dp.rho)
        num = float(np.sum(np.abs(t["wirelength"][1])))
        den = float(np.sum(np.abs(g_d)))
        if den <= 0:
            return 0.0
        return (num if num > 0 else 1.0) / den


def initialize(design: Design, config: RunConfig, fillers: FillerSet | None = None) -> PlacementState:
    """Seeded initial state: movables clustered at the die centre (or taken from
    the design in manual mode), fillers scattered uniformly over the die."""
    rng = np.random.default_rng(config.seed)
    a = design_arrays(design)
    W, H = design.die.width, design.die.height
    size = a.size[a.movable]
    if config.init == "manual":
        mov = a.fixed_xy[a.movable].copy()
        if np.isnan(mov).any():
            missing = [design.components[i].name for i, row in zip(a.movable, mov) if np.isnan(row).any()]
            raise NetlistError("components", f"manual initialization needs positions for {missing[:5]}")
    else:
        jitter = rng.uniform(-INIT_JITTER, INIT_JITTER, size=(len(size), 2)) * np.array([W, H])
        mov = np.array([W / 2, H / 2]) + jitter - size / 2
    if fillers is None:
        fillers = make_fillers(design, DensityParams(config.grid, config.target_density, config.rho))
    nf = fillers.count
    fil = np.column_stack([
        rng.uniform(0, max(W - fillers.width, 0.0), nf),
        rng.uniform(0, max(H - fillers.height, 0.0), nf),
    ]) if nf else np.zeros((0, 2))
    return PlacementState(mov, fil, (fillers.width, fillers.height), 0, config.seed)


@dataclass
class TraceRecord:
    iteration: int
    objective: float
    overflow: float
    hpwl: float
    density_weight: float
    gamma: float
    crossings: int | None = None
    movable: list | None = None
    fillers: list | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class PlacementResult:
    state: PlacementState
    status: str
    iterations: int
    overflow: float
    trace: list[TraceRecord] = field(default_factory=list)
    runtime: float = 0.0
    message: str = ""


def run_global(design: Design, config: RunConfig | None = None) -> PlacementResult:
    """Run analytical global placement until overflow drops below the stop
    threshold or the iteration budget is spent."""
    config = config or RunConfig()
    t0 = time.perf_counter()
    dp = DensityParams(config.grid, config.target_density, config.rho)
    fillers = make_fillers(design, dp)
    obj = Objective(design, config, fillers)
    state = initialize(design, config, fillers)
    groups = cons.compile_groups(design)
    schedule = cons.ProjectionSchedule(config.s0, config.sT, config.iters)
    W, H = design.die.width, design.die.height
    mov_size = obj.arrays.size[obj.arrays.movable]
    fil_size = np.tile([fillers.width, fillers.height], (fillers.count, 1))
    nm, nf = obj.nm, obj.nf

    def project(vec: np.ndarray, t: int, s: float | None = None) -> np.ndarray:
        mov, fil = _to_xy(vec, nm, nf)
        s_t = cons.sharpness(t, schedule) if s is None else s
        mov = cons.apply_all(mov, mov_size, groups, s_t, W, H)
        fil = cons.clamp_to_die(fil, fil_size, W, H)
        return _from_xy(mov, fil)

    x0 = project(state.to_vector(), 0)
    mov0, _ = _to_xy(x0, nm, nf)
    ovf = obj.overflow(mov0)
    obj.set_gamma(ovf)
    if config.density_weight is None:
        obj.density_weight = obj.init_density_weight(x0)
    else:
        obj.density_weight = float(config.density_weight)

    opt = make_optimizer(config.optimizer, state.blocks(), len(x0), eta0=config.eta0, eta_min=config.eta_min,
                         k_max=config.iters, bin_size=obj.grid.bin_size)
    trace: list[TraceRecord] = []
    growth = min(LAMBDA_GROWTH, LAMBDA_CAP_PER_100 ** (1.0 / 100.0))

    def record(k: int, vec: np.ndarray, value: float, crossings=None):
        mov, fil = _to_xy(vec, nm, nf)
        snap = config.snapshot_every > 0 and k % config.snapshot_every == 0
        if not snap and crossings is None:
            return
        trace.append(TraceRecord(
            k, float(value), float(ovf), hpwl(obj.pins(mov)), float(obj.density_weight), float(obj.wl.gamma),
            crossings,
            mov.tolist() if snap else None,
            fil.tolist() if snap else None,
        ))

    status, message = "max-iterations", ""
    try:
        x = opt.start(x0, obj, project)
        record(0, x, opt.value)
        k = 0
        while True:
            if config.density_weight is None or config.density_weight > 0:
                if ovf < config.overflow_stop and obj.density_weight > 0:
                    status = "success"
                    break
            if k >= config.iters:
                break
            x = opt.step()
            k += 1
            mov, _ = _to_xy(x, nm, nf)
            ovf = obj.overflow(mov)
            obj.set_gamma(ovf)
            obj.density_weight *= growth
            crossings = None
            if obj.sp.active and obj.sp.variant == "full" and obj.sp.is_refresh(k):
                crossings = obj.refresh_congestion(mov)
            record(k, x, opt.value, crossings)
    except DivergenceError as exc:
        status, message = "diverged", str(exc)
        x = exc.last_good
        k = exc.iteration

    # the iterate carries the sharpness of the iteration it stopped at; finish the projection
    x = project(x, config.iters, s=config.sT)
    mov, _ = _to_xy(x, nm, nf)
    final_ovf = obj.overflow(mov)
    final = state.with_vector(x, k)
    return PlacementResult(final, status, k, final_ovf, trace, time.perf_counter() - t0, message)


# --------------------------------------------------------------------------- estimator


def check_design(X) -> Design:
    """Accept a Design, a YAML string, or a path to a YAML file."""
    if isinstance(X, Design):
        return X
    if isinstance(X, str) and ("\n" in X or X.lstrip().startswith("design")):
        return parse_design(X)
    if isinstance(X, str) or hasattr(X, "__fspath__"):
        return load_design(X)
    raise TypeError(f"expected a Design, YAML text or a path, got {type(X).__name__}")


class GlobalPlacer(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Analytical global placer for photonic netlists.

    ``fit`` runs the placement; ``transform`` returns the design with the
    placed positions filled in. Parameters mirror :class:`RunConfig`.
    """

    def __init__(self, *, seed=0, iters=1500, init="center-random", wl="coswa", alpha=1.4, gamma0=None,
                 angle_margin=0.0, theta2_raw=False, spacing="full", lambda_ns=1.0, spacing_refresh=100,
                 spacing_literal=False, target_density=1.0, grid=None, rho=2000.0, overflow_stop=0.07,
                 density_weight=None, optimizer="bnag", eta0=1.0, eta_min=0.1, s0=0.05, sT=1.0,
                 snapshot_every=10):
        self.seed = seed
        self.iters = iters
        self.init = init
        self.wl = wl
        self.alpha = alpha
        self.gamma0 = gamma0
        self.angle_margin = angle_margin
        self.theta2_raw = theta2_raw
        self.spacing = spacing
        self.lambda_ns = lambda_ns
        self.spacing_refresh = spacing_refresh
        self.spacing_literal = spacing_literal
        self.target_density = target_density
        self.grid = grid
        self.rho = rho
        self.overflow_stop = overflow_stop
        self.density_weight = density_weight
        self.optimizer = optimizer
        self.eta0 = eta0
        self.eta_min = eta_min
        self.s0 = s0
        self.sT = sT
        self.snapshot_every = snapshot_every

    def config(self) -> RunConfig:
        names = {f.name for f in fields(RunConfig)}
        return RunConfig(**{k: v for k, v in self.get_params().items() if k in names})

    def fit(self, X, y=None):
        design = check_design(X)
        result = run_global(design, self.config())
        self.design_ = design
        self.result_ = result
        self.state_ = result.state
        self.positions_ = result.state.movable
        self.fillers_ = result.state.fillers
        self.status_ = result.status
        self.n_iter_ = result.iterations
        self.overflow_ = result.overflow
        self.trace_ = result.trace
        return self

    def transform(self, X=None) -> Design:
        check_is_fitted(self, "positions_")
        design = self.design_ if X is None else check_design(X)
        a = design_arrays(design)
        if a.n_movable != len(self.positions_):
            raise NetlistError("", "design does not match the fitted placement")
        return design.with_positions(a.full_positions(self.positions_))

    def meta(self) -> dict:
        check_is_fitted(self, "positions_")
        return {"iterations": int(self.n_iter_), "final_overflow": float(self.overflow_), "seed": int(self.seed),
                "status": self.status_}
