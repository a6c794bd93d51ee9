//! Named verification suites. Each returns a [`Report`] whose checks carry a
//! residual, a tolerance and the identity they exercise.
//!
//! Sizes scale with `SuiteConfig::size` where the identity converges with
//! the grid. A few checks pin their resolution because the tolerance is
//! reached only there: the winding integrals (N = 2¹⁸ on a circle), the
//! Bloch integrals (512²) and the Bott degree-0 check (8193 time samples).

use crate::bott_holonomy::{self as bh, ConnectionLoop, EtaOptions, TransportOptions};
use crate::chern::{self, AnyPath};
use crate::error::{Error, Result};
use crate::fields::{self, PathField, ProjectionField, UnitaryField, Window};
use crate::form::{MatrixForm, MixedForm};
use crate::grid::{Axis, Grid};
use crate::linalg::C64;
use crate::report::{Check, Environment, Report};
use crate::stable_ops::{self as so, TIME_AXIS};
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Stokes,
    CsVanishing,
    Sums,
    BasedLoop,
    BottDegree0,
    Deta,
    Gluing,
    Reversal,
    Example,
    Integrality,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Stokes,
        Suite::CsVanishing,
        Suite::Sums,
        Suite::BasedLoop,
        Suite::BottDegree0,
        Suite::Deta,
        Suite::Gluing,
        Suite::Reversal,
        Suite::Example,
        Suite::Integrality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Stokes => "stokes",
            Suite::CsVanishing => "cs-vanishing",
            Suite::Sums => "sums",
            Suite::BasedLoop => "based-loop",
            Suite::BottDegree0 => "bott-degree0",
            Suite::Deta => "deta",
            Suite::Gluing => "gluing",
            Suite::Reversal => "reversal",
            Suite::Example => "example",
            Suite::Integrality => "integrality",
        }
    }

    pub fn from_name(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    /// Points per axis of the base grids.
    pub size: usize,
    pub seed: u64,
    pub max_deg: Option<usize>,
    /// Replaces every default tolerance when set.
    pub tol: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { size: 32, seed: 0, max_deg: None, tol: None }
    }
}

struct Run {
    cfg: SuiteConfig,
    checks: Vec<Check>,
    env: Environment,
    clock: Instant,
}

impl Run {
    fn new(cfg: SuiteConfig) -> Run {
        Run {
            cfg,
            checks: Vec::new(),
            env: Environment { max_deg: cfg.max_deg, ..Default::default() },
            clock: Instant::now(),
        }
    }

    /// Records a check timed from the previous one.
    fn check(&mut self, name: &str, anchor: &str, residual: f64, tol: f64) {
        let secs = self.clock.elapsed().as_secs_f64();
        self.checks.push(Check::new(name, anchor, residual, self.cfg.tol.unwrap_or(tol), secs));
        self.clock = Instant::now();
    }

    fn sizes(&mut self, s: &[usize]) {
        self.env.sizes.extend_from_slice(s);
    }

    fn seeds(&mut self, s: impl IntoIterator<Item = u64>) {
        self.env.seeds.extend(s);
    }

    fn finish(self, suite: Suite) -> Report {
        Report::new(suite.name(), self.checks, self.env)
    }
}

/// Runs one suite. Errors are numerical preconditions that failed outright
/// (for instance transport drift); the CLI reports them as failures.
pub fn run(suite: Suite, cfg: SuiteConfig) -> Result<Report> {
    if cfg.size < 8 {
        return Err(Error::InvalidInput("suites need size ≥ 8".into()));
    }
    let mut r = Run::new(cfg);
    match suite {
        Suite::Stokes => stokes(&mut r)?,
        Suite::CsVanishing => cs_vanishing(&mut r)?,
        Suite::Sums => sums(&mut r)?,
        Suite::BasedLoop => based_loop(&mut r)?,
        Suite::BottDegree0 => bott_degree0(&mut r)?,
        Suite::Deta => deta(&mut r)?,
        Suite::Gluing => gluing(&mut r)?,
        Suite::Reversal => reversal(&mut r)?,
        Suite::Example => example(&mut r)?,
        Suite::Integrality => integrality(&mut r)?,
    }
    Ok(r.finish(suite))
}

/// All suites merged into one report named "all".
pub fn run_all(cfg: SuiteConfig) -> Result<Report> {
    let mut checks = Vec::new();
    let mut env = Environment { max_deg: cfg.max_deg, ..Default::default() };
    for s in Suite::ALL {
        let r = run(s, cfg)?;
        checks.extend(r.checks);
        env.sizes.extend(r.environment.sizes);
        env.seeds.extend(r.environment.seeds);
    }
    Ok(Report::new("all", checks, env))
}

/// Least-squares slope of −log(residual) against log(size).
pub fn fitted_order(sizes: &[usize], residuals: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| -r.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn t2(size: usize) -> Result<Grid> {
    Grid::torus(&["x", "y"], size, 1.0)
}

fn t2_path(size: usize) -> Result<Grid> {
    Grid::new(vec![
        Axis::periodic("x", size, 1.0),
        Axis::periodic("y", size, 1.0),
        Axis::interval(TIME_AXIS, size + 1, 1.0),
    ])
}

/// A random rank-1 projection loop on T³ in window (0, 3).
pub fn random_t3_loop(size: usize, nt: usize, seed: u64) -> Result<PathField<ProjectionField>> {
    let g = Grid::new(vec![
        Axis::periodic("x", size, 1.0),
        Axis::periodic("y", size, 1.0),
        Axis::periodic("z", size, 1.0),
        Axis::periodic(TIME_AXIS, nt, 1.0),
    ])?;
    PathField::new(fields::random_projection(&g, Window::new(0, 3)?, seed, 1, 1)?, TIME_AXIS)
}

/// A random free loop of unitaries on T², closed by repeating the first
/// slice at the end of an interval time axis.
pub fn random_free_loop(size: usize, nt: usize, seed: u64, window: Window) -> Result<PathField<UnitaryField>> {
    let base = t2(size)?;
    let circle = base.with_axis(Axis::periodic(TIME_AXIS, nt, 1.0))?;
    let u = fields::random_unitary(&circle, window, seed, 1)?;
    let nn = window.dim() * window.dim();
    let t = circle.dim() - 1;
    let data = &u.values.components()[0];
    let slices: Vec<Vec<C64>> = (0..=nt).map(|k| circle.slice(data, nn, t, k % nt)).collect();
    let grid = base.with_axis(Axis::interval(TIME_AXIS, nt + 1, 1.0))?;
    let values = MatrixForm::from_blocks(&grid, window.dim(), grid.stack(&slices, nn, t))?;
    PathField::new(UnitaryField::new(window, values)?, TIME_AXIS)
}

fn stokes(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    let sizes = [n / 2, n, 2 * n];
    r.sizes(&sizes);
    let seed = r.cfg.seed;
    r.seeds([seed, seed + 1]);
    let (mut odd, mut even) = (Vec::new(), Vec::new());
    for &s in &sizes {
        let u = fields::random_unitary(&t2_path(s)?, Window::new(0, 2)?, seed, 1)?;
        odd.push(chern::stokes_residual(AnyPath::Unitary(&PathField::new(u, TIME_AXIS)?))?);
        let p = fields::random_projection(&t2_path(s)?, Window::new(0, 3)?, seed + 1, 1, 1)?;
        even.push(chern::stokes_residual(AnyPath::Projection(&PathField::new(p, TIME_AXIS)?))?);
    }
    let anchor = "dCS = Ch(end) - Ch(start)";
    r.check("stokes/odd/finest-residual (informational)", anchor, odd[2], 1.0);
    r.check("stokes/even/finest-residual (informational)", anchor, even[2], 1.0);
    // Order checks report 1.8 − p for the least-squares slope p of
    // log(residual) against log(1/h).
    r.check("stokes/odd/order-below-1.8", anchor, 1.8 - fitted_order(&sizes, &odd), 0.0);
    r.check("stokes/even/order-below-1.8", anchor, 1.8 - fitted_order(&sizes, &even), 0.0);
    Ok(())
}

fn cs_vanishing(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    r.sizes(&[n]);
    let seeds: Vec<u64> = (0..5).map(|k| r.cfg.seed + k).collect();
    r.seeds(seeds.iter().copied());
    let g = t2(n)?;
    let nt = 33;
    let w = Window::new(-1, 1)?;
    let (mut commute, mut annihilate, mut swap, mut gamma, mut sampled): (f64, f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0, 0.0);
    for &s in &seeds {
        let p = fields::random_projection(&g, w, 2 * s + 100, 1, 1)?;
        let q = fields::random_projection(&g, w, 2 * s + 101, 1, 1)?;
        commute = commute.max(chern::even_cs(&so::commute_homotopy(&p, &q, nt)?)?.explicit.norm_inf());
        annihilate = annihilate.max(chern::even_cs(&so::annihilate_homotopy(&p, nt)?)?.explicit.norm_inf());
        // Transposition across the two summands of P ⊕ Q.
        let pq = so::oplus(&p, &q)?;
        swap = swap.max(chern::even_cs(&so::transposition_homotopy(&pq, -1, nt)?)?.explicit.norm_inf());
        let u = fields::random_unitary(&g, w, s + 200, 1)?;
        gamma = gamma.max(so::gamma_g_cs(&u, nt)?.norm_inf());
        sampled = sampled.max(chern::odd_cs_streamed(&so::gamma_g(&u, nt)?)?.norm_inf());
    }
    r.check("cs-vanishing/commute", "CS of the commuting homotopy vanishes", commute, 1e-8);
    r.check("cs-vanishing/annihilate", "CS of P ⊕ P^⊥ → I_0 vanishes", annihilate, 1e-8);
    r.check("cs-vanishing/transposition", "CS of a cross-block basis swap vanishes", swap, 1e-8);
    r.check("cs-vanishing/gamma-g", "CS of γ_g vanishes", gamma, 1e-8);
    // Stencil CS of the sampled γ_g path carries the discrete chain-rule
    // gap; recorded so the chain-rule route above has a visible baseline.
    r.check("cs-vanishing/gamma-g-sampled-stencil (informational)", "plumbing", sampled, 1.0);
    Ok(())
}

fn sums(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    r.sizes(&[n]);
    let s = r.cfg.seed;
    r.seeds([s]);
    let g = t2(n)?;
    let wa = Window::new(0, 2)?;
    let wb = Window::new(-1, 2)?;
    let anchor_ch = "Ch(f ⊞ g) = Ch(f) + Ch(g)";
    let anchor_cs = "CS(f_t ⊞ g_t) = CS(f_t) + CS(g_t)";
    let ua = fields::random_unitary(&g, wa, s + 1, 1)?;
    let ub = fields::random_unitary(&g, wb, s + 2, 1)?;
    let gap = chern::odd_chern(&so::boxplus(&ua, &ub)?, r.cfg.max_deg)?
        .sub(&chern::odd_chern(&ua, r.cfg.max_deg)?.add(&chern::odd_chern(&ub, r.cfg.max_deg)?)?)?;
    r.check("sums/odd-chern", anchor_ch, gap.norm_inf(), 1e-12);
    let pa = fields::random_projection(&g, wb, s + 3, 1, 1)?;
    let pb = fields::random_projection(&g, wb, s + 4, 1, 2)?;
    let gap = chern::even_chern(&so::boxplus(&pa, &pb)?, r.cfg.max_deg)?
        .sub(&chern::even_chern(&pa, r.cfg.max_deg)?.add(&chern::even_chern(&pb, r.cfg.max_deg)?)?)?;
    r.check("sums/even-chern", anchor_ch, gap.norm_inf(), 1e-12);

    let m = n.min(16);
    let gp = t2_path(m)?;
    let a = PathField::new(fields::random_unitary(&gp, wa, s + 5, 1)?, TIME_AXIS)?;
    let b = PathField::new(fields::random_unitary(&gp, wb, s + 6, 1)?, TIME_AXIS)?;
    let gap = chern::odd_cs_streamed(&so::path_sum(&a, &b, so::boxplus)?)?
        .sub(&chern::odd_cs_streamed(&a)?.add(&chern::odd_cs_streamed(&b)?)?)?;
    r.check("sums/odd-cs", anchor_cs, gap.norm_inf(), 1e-12);
    let a = PathField::new(fields::random_projection(&gp, wa, s + 7, 1, 1)?, TIME_AXIS)?;
    let b = PathField::new(fields::random_projection(&gp, wb, s + 8, 1, 1)?, TIME_AXIS)?;
    let gap = chern::even_cs(&so::path_sum(&a, &b, so::boxplus)?)?
        .fiber
        .sub(&chern::even_cs(&a)?.fiber.add(&chern::even_cs(&b)?.fiber)?)?;
    r.check("sums/even-cs", anchor_cs, gap.norm_inf(), 1e-12);

    // ⊕ and ⊞ agree entrywise after the fixed index permutation.
    let (x, y) = (so::oplus(&pa, &pb)?, so::boxplus(&pa, &pb)?);
    let half = x.n() / 2;
    let sigma = so::oplus_to_boxplus_permutation(half);
    let nn = x.n();
    let mut worst: f64 = 0.0;
    for site in 0..g.nsites() {
        let (bx, by) = (x.block(site), y.block(site));
        for i in 0..nn {
            for j in 0..nn {
                worst = worst.max((bx[i * nn + j] - by[sigma[i] * nn + sigma[j]]).norm());
            }
        }
    }
    r.check("sums/oplus-boxplus-permutation", "⊕ and ⊞ differ by a fixed permutation", worst, 0.0);
    Ok(())
}

fn based_loop(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    let sizes = [n / 2, n];
    r.sizes(&sizes);
    let seeds: Vec<u64> = (0..3).map(|k| r.cfg.seed + k).collect();
    r.seeds(seeds.iter().copied());
    let w = Window::new(0, 2)?;
    let nt = 32;
    let mut cs_gap: f64 = 0.0;
    let mut sum_gap: f64 = 0.0;
    let mut cs_scale: f64 = 0.0;
    for &s in &seeds {
        for &size in &sizes {
            let g = random_free_loop(size, nt, s + 300, w)?;
            let star = so::based_loop(&g, 33)?;
            let direct = chern::odd_cs_streamed(&g)?;
            cs_scale = cs_scale.max(direct.norm_inf());
            cs_gap = cs_gap.max(star.odd_cs()?.sub(&direct)?.norm_inf());
            if size == n {
                let h = random_free_loop(size, nt, s + 400, w)?;
                let lhs = so::based_loop(&so::path_sum(&g, &h, so::boxplus)?, 33)?;
                let rhs = so::based_loop(&h, 33)?;
                for (a, (b, c)) in lhs.segments.iter().zip(star.segments.iter().zip(&rhs.segments)) {
                    let bc = so::path_sum(b, c, so::boxplus)?;
                    sum_gap = sum_gap.max(a.field.values.sub(&bc.field.values)?.norm_inf());
                }
            }
        }
    }
    let anchor = "CS(based loop of g_t) = CS(g_t)";
    r.check("based-loop/cs", anchor, cs_gap, 1e-6 * cs_scale.max(1.0));
    r.check("based-loop/boxplus", "based loop of g ⊞ h = based loop of g ⊞ based loop of h", sum_gap, 1e-12);
    Ok(())
}

fn bott_degree0(r: &mut Run) -> Result<()> {
    // Fixed small base: the degree-0 CS has no spatial error, only the
    // time stencil's (2πδ)²/6 per unit of rank.
    let g = t2(4)?;
    r.sizes(&[4, 8193]);
    let seeds: Vec<u64> = (0..5).map(|k| r.cfg.seed + k).collect();
    r.seeds(seeds.iter().copied());
    let mut worst: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for (i, &s) in seeds.iter().enumerate() {
        let w = if i % 2 == 0 { Window::new(-2, 2)? } else { Window::new(0, 3)? };
        let p = fields::random_projection(&g, w, s + 500, 1, 1 + i % 2)?;
        let rank = p.rank()? as f64;
        let path = bh::bott_map(&p, 8193)?;
        let cs0 = chern::odd_cs_streamed(&path)?.part_or_zero(0);
        for site in 0..g.nsites() {
            let v = cs0.block(0, site)[0];
            worst = worst.max((v - C64::new(rank, 0.0)).norm()).max((v.re.round() - rank).abs());
            oracle = oracle.max((bh::det_winding(&path, site)? - rank).abs());
        }
    }
    r.check("bott-degree0/cs0-equals-rank", "degree-0 part of dβ = E*CS − Ch", worst, 1e-6);
    r.check("bott-degree0/det-winding-oracle", "plumbing", oracle, 1e-9);
    Ok(())
}

fn deta(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    let sizes = [n / 2, n];
    r.sizes(&sizes);
    let seeds: Vec<u64> = (0..3).map(|k| r.cfg.seed + k).collect();
    r.seeds(seeds.iter().copied());
    let opts = EtaOptions { max_deg: r.cfg.max_deg, ..Default::default() };
    let anchor = "dη = ∫_{S¹}Ch − Ch(h_*)";
    let ex = bh::deta_loop(&bh::paper_example_loop(n)?, opts)?;
    r.check("deta/example", anchor, ex.residual, 5e-3);
    // Informational: a stencil of h_* = e^{−2πi sin s} under-resolves its
    // phase gradient at this size.
    r.check("deta/example/stencil-route", anchor, ex.stencil_residual, 1.0);
    let mut worst: f64 = 0.0;
    let mut ratio_miss: f64 = 0.0;
    for &s in &seeds {
        let res: Vec<f64> = sizes
            .iter()
            .map(|&size| Ok(bh::deta_residual(&random_t3_loop(size, 16, s)?, opts)?.residual))
            .collect::<Result<_>>()?;
        worst = worst.max(res[1]);
        // Distance of the doubling ratio from the window [3.2, 4.8].
        let q = res[0] / res[1];
        ratio_miss = ratio_miss.max((3.2 - q).max(q - 4.8)).max(if q.is_nan() { f64::NAN } else { 0.0 });
    }
    r.check("deta/random-loops", anchor, worst, 5e-3);
    r.check("deta/random-loops/doubling-ratio-outside-3.2-4.8", anchor, ratio_miss, 0.0);
    Ok(())
}

fn gluing(r: &mut Run) -> Result<()> {
    let anchor = "CS(t g⁻¹dg) = Ch(g)";
    // Degree 1 on a fine circle; the discrete winding integral differs from
    // the integer by (2πh)²/6.
    let circle = Grid::torus(&["x"], 4096, 1.0)?;
    let u = fields::winding_unitary(&circle, "x", &[1], Window::new(0, 1)?)?;
    let lhs = bh::mapping_torus_chern(&bh::mapping_torus_connection(&u, 5)?, None)?.part_or_zero(1);
    let rhs = chern::odd_chern(&u, None)?.part_or_zero(1);
    r.check("gluing/degree1/pointwise", anchor, lhs.sub(&rhs)?.norm_inf(), 1e-10);
    r.check("gluing/degree1/integral", anchor, (lhs.integrate()? - C64::new(1.0, 0.0)).norm(), 1e-6);
    let m = 3 * r.cfg.size / 2;
    r.sizes(&[4096, m]);
    let g3 = Grid::torus(&["x", "y", "z"], m, 1.0)?;
    let su = fields::su2_degree_map(&g3, 1)?;
    let lhs = bh::mapping_torus_chern(&bh::mapping_torus_connection(&su, 5)?, Some(4))?.part_or_zero(3).integrate()?;
    let rhs = chern::odd_chern(&su, Some(3))?.part_or_zero(3).integrate()?;
    r.check("gluing/degree3/integral", anchor, (lhs - rhs).norm(), 1e-2);
    Ok(())
}

/// Largest period averaged over the remaining coordinates: component mean
/// times the lengths of its axes. A central-difference d has mean exactly
/// zero, so exact forms give 0 without the O(h²) slice dependence.
fn max_mean_period(f: &MixedForm) -> f64 {
    let grid = f.grid();
    let mut worst: f64 = 0.0;
    for part in f.parts().filter(|p| p.degree() > 0) {
        for (axes, c) in part.component_axes().iter().zip(part.components()) {
            let area: f64 = axes.iter().map(|&a| grid.axis(a).length).product();
            let mean = c.iter().sum::<C64>() / c.len() as f64;
            worst = worst.max(mean.norm() * area);
        }
    }
    worst
}

fn reversal(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    let m = n / 2;
    r.sizes(&[m / 2, m]);
    let s = r.cfg.seed;
    r.seeds([s]);
    let opts = EtaOptions { max_deg: r.cfg.max_deg, ..Default::default() };
    let anchor = "reversal conjugates: η ↦ −η, h_* ↦ h_*⁻¹";
    let ex = bh::reversal_loop(&bh::paper_example_loop(m)?, opts)?;
    r.check("reversal/example/eta", anchor, ex.eta_gap, 1e-8);
    r.check("reversal/example/holonomy", anchor, ex.holonomy_gap, 1e-6);
    let lp = ConnectionLoop::from_projections(&random_t3_loop(m, 16, s)?)?;
    let rand = bh::reversal_loop(&lp, opts)?;
    r.check("reversal/random/holonomy", anchor, rand.holonomy_gap, 1e-6);
    // Off the abelian example η + η̄ is exact rather than zero: its mean
    // periods, relative to those of η, shrink with the grid.
    let rel = |size: usize| -> Result<f64> {
        let lp = ConnectionLoop::from_projections(&random_t3_loop(size, 16, s)?)?;
        let fwd = bh::eta_loop(&lp, opts)?.eta;
        let bwd = bh::eta_loop(&lp.reversed(), opts)?.eta;
        Ok(max_mean_period(&fwd.add(&bwd)?) / max_mean_period(&fwd))
    };
    let (coarse, fine) = (rel(m / 2)?, rel(m)?);
    r.check("reversal/random/eta-sum-relative-periods", anchor, fine, 2e-2);
    r.check("reversal/random/eta-sum-periods-shrink", anchor, fine / coarse, 0.4);
    let p = fields::random_projection(&t2(m)?, Window::new(-1, 2)?, s + 600, 1, 1)?;
    let e = bh::eta_form(&bh::constant_loop(&p, 16, 1.0)?, opts)?;
    r.check("reversal/pullback/eta", "η of a pulled-back loop is 0", e.eta.norm_inf(), 0.0);
    let id = UnitaryField::identity(p.grid(), e.holonomy.window);
    r.check(
        "reversal/pullback/holonomy",
        "η of a pulled-back loop is 0",
        e.holonomy.values.sub(&id.values)?.norm_inf(),
        0.0,
    );
    Ok(())
}

/// (sin h / h)² ∂f/∂p ∂g/∂s on the grid of the abelian example: the
/// central-difference derivatives of cos p and sin s.
fn example_shape(grid: &Grid) -> MatrixForm {
    let mut f = MatrixForm::zeros(grid, 3, 1);
    let h = grid.axis(0).spacing();
    let k = (h.sin() / h).powi(2);
    let c = f.component_mut(&[0, 1, 2]).expect("top component");
    for (site, v) in c.iter_mut().enumerate() {
        let x = grid.point(site);
        *v = C64::new(-2.0 * x[0].sin() * x[2].cos() * k, 0.0);
    }
    f
}

/// The constant c with degree-3 ∫_{S¹}Ch = c·L·(−2 sin p cos s) in the
/// abelian example, from Tr exp(F/2πi) with F = i(f′dp∧dq + g′ds∧dt).
pub const EXAMPLE_CONSTANT: f64 = 1.0 / (8.0 * PI * PI);

/// The commonly quoted 1/(4π²), twice the derived constant; reported only.
pub const EXAMPLE_CONSTANT_QUOTED: f64 = 1.0 / (4.0 * PI * PI);

/// Fitted constant, pointwise deviation from the fitted multiple, and the
/// degree-3 holonomy Chern norm for the abelian example at `size`.
pub struct ExampleMeasurement {
    pub constant: f64,
    pub relative_deviation: f64,
    pub holonomy_ch3: f64,
}

pub fn measure_example(size: usize) -> Result<ExampleMeasurement> {
    let grid = fields::example_grid(size)?;
    let conn = fields::paper_example_connection(&grid)?;
    let length = grid.axis(3).length;
    let ch = chern::connection_chern(&conn, None)?.fiber_integrate(TIME_AXIS)?.part_or_zero(3);
    let base = ch.grid().clone();
    let shape = example_shape(&base).scale(C64::new(length, 0.0));
    let (a, b) = (&ch.components()[0], &shape.components()[0]);
    let num: f64 = a.iter().zip(b).map(|(x, y)| x.re * y.re).sum();
    let den: f64 = b.iter().map(|y| y.re * y.re).sum();
    // The fiber-first convention moves dt past three 1-forms, so the
    // fitted constant carries the orientation sign −1; compare magnitudes.
    let constant = num / den;
    let dev =
        ch.sub(&shape.scale(C64::new(constant, 0.0)))?.norm_inf() / shape.scale(C64::new(constant, 0.0)).norm_inf();
    let hol = bh::transport_connection(&conn, TIME_AXIS, TransportOptions::default())?.hol;
    let holonomy_ch3 = chern::odd_chern(&hol, Some(3))?.part_or_zero(3).norm_inf();
    Ok(ExampleMeasurement { constant, relative_deviation: dev, holonomy_ch3 })
}

fn example(r: &mut Run) -> Result<()> {
    let n = r.cfg.size;
    r.sizes(&[n]);
    let m = measure_example(n)?;
    let anchor = "abelian counterexample: ∫_{S¹}Ch ≠ Ch(h_*)";
    r.check("example/pointwise-proportionality", anchor, m.relative_deviation, 1e-3);
    r.check("example/constant-vs-derived", anchor, (m.constant.abs() / EXAMPLE_CONSTANT - 1.0).abs(), 1e-3);
    r.check("example/holonomy-ch3", anchor, m.holonomy_ch3, 1e-10);
    Ok(())
}

/// Degree of a Bloch map by summing signed solid angles of lattice
/// triangles, independent of any Chern form.
pub fn solid_angle_degree(d: i64, size: usize) -> f64 {
    let v = |i: usize, j: usize| {
        let (x, y) = (2.0 * PI * (i % size) as f64 / size as f64, 2.0 * PI * (j % size) as f64 / size as f64);
        fields::bloch_vector(d, x, y)
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let tri = |a: [f64; 3], b: [f64; 3], c: [f64; 3]| {
        let cross = [b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]];
        2.0 * dot(a, cross).atan2(1.0 + dot(a, b) + dot(b, c) + dot(c, a))
    };
    let mut total = 0.0;
    for i in 0..size {
        for j in 0..size {
            let (a, b, c, e) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            total += tri(a, b, c) + tri(a, c, e);
        }
    }
    total / (4.0 * PI)
}

/// Sign relating the degree-2 Chern integral of a Bloch projection to the
/// solid-angle degree of its vector.
pub const BLOCH_SIGN: f64 = 1.0;

fn integrality(r: &mut Run) -> Result<()> {
    let anchor = "Chern integrals are integers";
    r.sizes(&[1 << 18, 512]);
    let circle = Grid::torus(&["t"], 1 << 18, 1.0)?;
    let mut worst: f64 = 0.0;
    for m in -2i64..=3 {
        let u = fields::winding_unitary(&circle, "t", &[m], Window::new(0, 1)?)?;
        let v = chern::integrate_degree(&chern::odd_chern(&u, Some(1))?, 1)?;
        worst = worst.max((v - C64::new(m as f64, 0.0)).norm());
    }
    r.check("integrality/winding", anchor, worst, 1e-8);
    let torus = Grid::torus(&["x", "y"], 512, 1.0)?;
    let mut worst: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    for d in 0..=2 {
        let oracle = BLOCH_SIGN * solid_angle_degree(d, 64);
        oracle_gap = oracle_gap.max((oracle - d as f64).abs());
        let p = fields::bloch_projection(&torus, d)?;
        let v = chern::integrate_degree(&chern::even_chern(&p, Some(2))?, 2)?;
        worst = worst.max((v - C64::new(oracle.round(), 0.0)).norm());
    }
    r.check("integrality/bloch", anchor, worst, 1e-3);
    r.check("integrality/bloch/solid-angle-oracle", "plumbing", oracle_gap, 1e-9);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn solid_angle_oracle_counts_degree() {
        for d in 0..=2 {
            assert!((BLOCH_SIGN * solid_angle_degree(d, 32) - d as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn fitted_order_of_a_power_law() {
        let sizes = [16, 32, 64];
        let res: Vec<f64> = sizes.iter().map(|&s| 3.0 * (s as f64).powi(-2)).collect();
        assert!((fitted_order(&sizes, &res) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn free_loops_close() {
        let g = random_free_loop(8, 8, 1, Window::new(0, 2).unwrap()).unwrap();
        assert!(g.is_loop());
    }
}
