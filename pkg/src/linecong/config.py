"""Numerical thresholds and run settings, kept in one place."""

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # absolute floor for divisions (reciprocals, sqrt, focal distances)
    eps_div: float = 1e-12
    # integrability residual, relative to the derivative scale
    eps_int: float = 1e-9
    # "on the discriminant": |delta| <= eps_delta * |S|^2
    eps_delta: float = 1e-8
    # umbilic: |S - lambda I| <= eps_umb * |S|
    eps_umb: float = 1e-8
    # implicit-curve gradient floor, relative to the field scale
    eps_grad: float = 1e-7
    # generic "quantity != 0" test, relative to a homogeneity-matched scale
    rel_zero: float = 1e-6
    # ridge branch tagging |g_i| < ridge_tag * scale
    ridge_tag: float = 1e-6
    # Newton corrector target, relative to the field scale
    corrector: float = 1e-12
    # least-squares gate for the equiaffine PDE solve
    lstsq_gate: float = 1e-10
    # A_k reading: pure powers below ak_rel * jet norm count as zero
    ak_rel: float = 1e-5

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Numerics:
    degree: int = 4
    step: float = 0.01
    grid: int = 48
    maxlen: float = 2.0
    line_step: float = 0.01
    portrait_seeds: int = 8
    scan_stride: int = 10
    tol: Tolerances = field(default_factory=Tolerances)

    def with_overrides(self, **kw) -> "Numerics":
        tol_keys = {f.name for f in fields(Tolerances)}
        tkw = {k: v for k, v in kw.items() if k in tol_keys}
        nkw = {k: v for k, v in kw.items() if k not in tol_keys}
        out = replace(self, **nkw)
        if tkw:
            out = replace(out, tol=replace(out.tol, **tkw))
        return out


DEFAULT_TOL = Tolerances()
DEFAULT_NUMERICS = Numerics()
