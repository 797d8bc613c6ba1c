//! Registry of named verification checks run by `gharm verify`.
//!
//! Every check returns one or more [`VerificationReport`]s; a report passes
//! when its criterion holds. Ratios recorded as `err/tol` pass at ≤ 1.

use std::sync::Arc;

use rayon::prelude::*;

use super::HarnessError;
use crate::config::QuadratureConfig;
use crate::field::{Axis, Grid, SampledField};
use crate::fracops::{frac_power_balakrishnan, frac_power_pointwise_field, frac_power_spectral};
use crate::group::{GroupSpec, Point, QuasiNorm};
use crate::heat::gaveau::h1_point;
use crate::heat::{HeatKind, HeatModel, PdeSettings};
use crate::meanvalue::{
    check_mv_first_lp, check_mv_second_lp, check_mv_second_pointwise, check_pseudo_poincare,
    check_w1p_characterization, shift_samples, Criterion, FieldFamily, Sample, TestFamily, VerificationReport,
};
use crate::quad::{self, GaussLegendre, Tolerance};
use crate::specfun::{gamma, phi_alpha_euclidean, psi, psi_half_line, psi_kummer, PsiParams};
use crate::squarefn::{g_alpha, g_s, phi_alpha_direct};
use crate::strichartz::{counterexample_exponent, equivalence_report, DifferenceOrder, StrichartzParams};

type Report = VerificationReport<f64>;

/// Inputs shared by all checks.
#[derive(Debug, Clone)]
pub struct CheckContext {
    pub seed: u64,
    pub cfg: QuadratureConfig,
    pub pde: PdeSettings,
}

pub const CHECK_NAMES: &[&str] = &[
    "g_alpha_isometry",
    "frac_routes",
    "phi_alpha",
    "psi_identities",
    "heat_kernel",
    "strichartz_equivalence",
    "counterexamples",
    "mv_first_lp",
    "mv_second_lp",
    "mv_second_pointwise",
    "w1p_characterization",
    "pseudo_poincare",
    "g_s_identity",
];

/// Expands `all` and rejects unknown names.
pub fn expand(names: &[String]) -> Result<Vec<String>, HarnessError> {
    if names.is_empty() {
        return Err(HarnessError::Usage("no checks named".into()));
    }
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(CHECK_NAMES.iter().map(|s| s.to_string()));
        } else if CHECK_NAMES.contains(&n.as_str()) {
            out.push(n.clone());
        } else {
            return Err(HarnessError::Usage(format!(
                "unknown check `{n}` (known: all, {})",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    Ok(out)
}

pub fn run_check(name: &str, ctx: &CheckContext) -> Result<Vec<Report>, HarnessError> {
    Ok(match name {
        "g_alpha_isometry" => vec![g_alpha_isometry(ctx)?],
        "frac_routes" => vec![frac_routes(ctx)?],
        "phi_alpha" => vec![phi_alpha(ctx)?],
        "psi_identities" => psi_identities()?,
        "heat_kernel" => heat_kernel(ctx)?,
        "strichartz_equivalence" => strichartz_equivalence(ctx)?,
        "counterexamples" => vec![counterexamples()?],
        "mv_first_lp" => vec![mv_first_lp(ctx)?],
        "mv_second_lp" => vec![mv_second_lp(ctx)?],
        "mv_second_pointwise" => vec![mv_second_pointwise(ctx)?],
        "w1p_characterization" => vec![w1p_characterization(ctx)?],
        "pseudo_poincare" => vec![pseudo_poincare(ctx)?],
        "g_s_identity" => vec![g_s_identity(ctx)?],
        other => return Err(HarnessError::Usage(format!("unknown check `{other}`"))),
    })
}

fn r1() -> Arc<GroupSpec<f64>> {
    Arc::new(GroupSpec::euclidean(1))
}

/// The default ℝ¹ grid: 4096 nodes, spacing 0.01.
pub fn r1_grid() -> Grid<f64> {
    Grid::cube(1, 0.01, 4096).expect("valid grid")
}

/// The default H¹ grid: 64³ nodes.
pub fn h1_grid() -> Grid<f64> {
    Grid::new(vec![
        Axis::centered(0.15, 64).expect("valid axis"),
        Axis::centered(0.15, 64).expect("valid axis"),
        Axis::centered(0.3, 64).expect("valid axis"),
    ])
    .expect("valid grid")
}

fn line_field(grid: Grid<f64>, f: impl Fn(f64) -> f64 + Sync) -> Result<SampledField<f64>, HarnessError> {
    Ok(SampledField::from_fn_truncated(r1(), grid, 8, |x: &[f64]| f(x[0]))?)
}

fn rel_l2(a: &SampledField<f64>, b: &SampledField<f64>) -> Result<f64, HarnessError> {
    Ok(a.add_scaled(b, -1.0)?.lp_norm(2.0)? / b.lp_norm(2.0)?)
}

/// Five smooth functions on the line, one oscillating.
fn line_functions() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("gauss", |x| (-x * x).exp()),
        ("skew_gauss", |x| (-x * x).exp() * (1.0 + 0.3 * x)),
        ("wide_gauss", |x| (-x * x / 4.0).exp()),
        ("two_peaks", |x| {
            (-2.0 * (x - 1.0) * (x - 1.0)).exp() - 0.5 * (-(x + 1.5) * (x + 1.5)).exp()
        }),
        ("chirp", |x| (-x * x / 2.0).exp() * (3.0 * x).cos()),
    ]
}

fn g_alpha_isometry(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    let fields = line_functions()
        .into_iter()
        .map(|(l, f)| Ok((l, line_field(r1_grid(), f)?)))
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut samples = Vec::new();
    let (mut deviation, mut spread) = (0.0f64, 0.0f64);
    for alpha in [0.25, 0.5, 1.0] {
        // ∫_0^∞ (tk²)^{2α}e^{−2tk²} dt/t = Γ(2α)2^{−2α}
        let constant = (gamma(2.0 * alpha) / 4f64.powf(alpha)).sqrt();
        let ratios = fields
            .par_iter()
            .map(|(_, f)| Ok(g_alpha(&m, f, alpha, &ctx.cfg)?.lp / f.lp_norm(2.0)? / constant))
            .collect::<Result<Vec<f64>, HarnessError>>()?;
        let (lo, hi) = min_max(&ratios);
        spread = spread.max(hi / lo - 1.0);
        for ((l, _), r) in fields.iter().zip(ratios) {
            deviation = deviation.max((r - 1.0).abs());
            samples.push(Sample {
                label: format!("alpha={alpha};{l}"),
                ratio: r,
            });
        }
    }
    Ok(Report::new(
        "g_alpha_isometry",
        "R1 5 functions, ratio over sqrt(Gamma(2a))*2^-a",
        samples,
        Criterion::All(vec![
            Criterion::MetricAtMost("max_deviation".into(), 0.02),
            Criterion::MetricAtMost("max_spread".into(), 0.01),
        ]),
        Vec::new(),
    )
    .with_metric("max_deviation", deviation)
    .with_metric("max_spread", spread))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(*x), hi.max(*x))
    })
}

fn frac_routes(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    let f = line_field(r1_grid(), |x| (-x * x).exp())?;
    let mut samples = Vec::new();
    let mut notes = Vec::new();
    for alpha in [0.25, 0.5] {
        let spectral = frac_power_spectral(&m, &f, alpha)?;
        let bal = frac_power_balakrishnan(&m, &f, alpha, &ctx.cfg)?;
        let (pointwise, change) = frac_power_pointwise_field(&m, &f, alpha, &ctx.cfg)?;
        notes.push(format!(
            "alpha={alpha}: residual={:e} eps_change={change:e}",
            bal.residual
        ));
        for (label, a, b) in [
            ("pointwise-balakrishnan", &pointwise, &bal.field),
            ("pointwise-spectral", &pointwise, &spectral),
            ("balakrishnan-spectral", &bal.field, &spectral),
        ] {
            samples.push(Sample {
                label: format!("alpha={alpha};{label}"),
                ratio: rel_l2(a, b)?,
            });
        }
    }
    Ok(Report::new(
        "frac_routes",
        "R1 gaussian, relative L2 error per route pair",
        samples,
        Criterion::MaxAtMost(1e-3),
        notes,
    ))
}

fn phi_alpha(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let alpha = 0.5;
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    let radii: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    let pairs = radii
        .par_iter()
        .map(|&r| {
            Ok((
                phi_alpha_euclidean(1, alpha, r)?,
                phi_alpha_direct(&m, alpha, &[r], &ctx.cfg)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>, HarnessError>>()?;
    let samples: Vec<Sample<f64>> = radii
        .iter()
        .zip(&pairs)
        .map(|(r, (k, d))| Sample {
            label: format!("r={r:.1}"),
            ratio: (k - d).abs(),
        })
        .collect();
    let max_error = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    // ∫_ℝ φ = 2∫_0^∞ φ(r) dr
    let tol = Tolerance::new(1e-14, 1e-12);
    let phi = |r: f64| phi_alpha_euclidean(1, alpha, r).unwrap_or(f64::NAN);
    let integral =
        2.0 * (quad::integrate(phi, 0.0, 10.0, tol)?.value + quad::integrate_to_infinity(phi, 10.0, tol)?.value);
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let sign_changes = values.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    // after the sign change |φ| rises to one extremum and then decays
    let first_negative = values.iter().position(|v| *v < 0.0).unwrap_or(values.len());
    let tail: Vec<f64> = values[first_negative..].iter().map(|v| v.abs()).collect();
    let peak = tail
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc })
        .0;
    let unimodal = tail[..=peak.min(tail.len().saturating_sub(1))]
        .windows(2)
        .all(|w| w[1] >= w[0])
        && tail[peak..].windows(2).all(|w| w[1] <= w[0]);
    let decay = (0..=500)
        .map(|i| {
            let r = 0.1 * i as f64;
            phi(r).abs() * (1.0 + r).powf(1.0 + 2.0 * alpha)
        })
        .fold(0.0, f64::max);
    Ok(Report::new(
        "phi_alpha",
        "n=1 alpha=0.5, |closed form - time quadrature| on r in [0,10]",
        samples,
        Criterion::All(vec![
            Criterion::MaxAtMost(1e-6),
            Criterion::MetricAtMost("abs_integral".into(), 1e-5),
            Criterion::MetricAtLeast("one_sign_change".into(), 1.0),
            Criterion::MetricAtLeast("unimodal_tail".into(), 1.0),
            Criterion::MetricAtMost("decay_sup".into(), 10.0),
        ]),
        vec![format!("sign changes on [0,10]: {sign_changes}")],
    )
    .with_metric("max_error", max_error)
    .with_metric("abs_integral", integral.abs())
    .with_metric(
        "one_sign_change",
        f64::from(u8::from(sign_changes == 1 && values[0] > 0.0)),
    )
    .with_metric("unimodal_tail", f64::from(u8::from(unimodal && !tail.is_empty())))
    .with_metric("decay_sup", decay))
}

fn psi_identities() -> Result<Vec<Report>, HarnessError> {
    let alphas = [0.2, 0.4, 0.6, 0.8];
    let betas = [1.0, 1.5, 2.0, 3.0];
    let cs = [0.5, 1.0, 2.0, 4.0];
    let radii = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut combos = Vec::new();
    for a in alphas {
        for b in betas {
            for c in cs {
                combos.push((a, b, c));
            }
        }
    }
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let rows = combos
        .par_iter()
        .map(|&(a, b, c)| {
            let label = format!("a={a};b={b};c={c}");
            let mut forms = 0.0f64;
            let mut kummer = 0.0f64;
            for nu in [2.0, 3.0] {
                let p = PsiParams::new(a, b, nu, c)?;
                for r in radii {
                    let u = psi(&p, r)?;
                    forms = forms.max(rel(u, psi_half_line(&p, r)?));
                    if nu == 2.0 {
                        kummer = kummer.max(rel(u, psi_kummer(&p, r)?));
                    }
                }
            }
            // (1+r)^{ν(α+β−1)} ψ(r) on [0, 50]
            let mut bound = Vec::new();
            for nu in [2.0, 3.0] {
                let p = PsiParams::new(a, b, nu, c)?;
                let w = nu * p.excess();
                let prod = |r: f64| Ok::<f64, HarnessError>(psi(&p, r)? * (1.0 + r).powf(w));
                let sup = (0..=100)
                    .map(|i| prod(0.5 * i as f64))
                    .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
                let growth = prod(50.0)? / prod(25.0)?;
                bound.push((nu, sup, growth));
            }
            Ok((label, forms, kummer, bound))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut forms = Vec::new();
    let mut kummer = Vec::new();
    let mut bound = Vec::new();
    let mut growth = 0.0f64;
    for (label, f, k, b) in rows {
        forms.push(Sample {
            label: label.clone(),
            ratio: f,
        });
        kummer.push(Sample {
            label: label.clone(),
            ratio: k,
        });
        for (nu, sup, g) in b {
            growth = growth.max(g);
            bound.push(Sample {
                label: format!("{label};nu={nu}"),
                ratio: sup,
            });
        }
    }
    Ok(vec![
        Report::new(
            "psi_two_forms",
            "4x4x4 (alpha,beta,c), nu in {2,3}, max relative difference over r",
            forms,
            Criterion::MaxAtMost(1e-8),
            Vec::new(),
        ),
        Report::new(
            "psi_kummer",
            "4x4x4 (alpha,beta,c), nu=2, max relative difference over r",
            kummer,
            Criterion::MaxAtMost(1e-8),
            Vec::new(),
        ),
        Report::new(
            "psi_decay_bound",
            "sup of psi(r)(1+r)^(nu(alpha+beta-1)) on [0,50]",
            bound,
            Criterion::All(vec![
                Criterion::Finite,
                Criterion::MetricAtMost("tail_growth".into(), 1.1),
            ]),
            vec!["tail_growth is the largest ratio of the weighted value at r=50 to r=25".into()],
        )
        .with_metric("tail_growth", growth),
    ])
}

fn err_over_tol(name: &str, family: &str, samples: Vec<(String, f64, f64)>, notes: Vec<String>) -> Report {
    let worst = samples.iter().map(|(_, e, _)| *e).fold(0.0, f64::max);
    let samples = samples
        .into_iter()
        .map(|(label, err, tol)| Sample {
            label,
            ratio: err / tol,
        })
        .collect();
    Report::new(name, family, samples, Criterion::MaxAtMost(1.0), notes).with_metric("max_error", worst)
}

/// Sample points on H¹ for pointwise kernel comparisons.
fn h1_points() -> Vec<[f64; 3]> {
    vec![
        [0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0],
        [0.0, 0.0, 0.7],
        [0.6, -0.4, 0.3],
        [1.2, 0.5, -1.0],
        [-1.5, 1.0, 2.0],
        [2.0, 0.0, 0.0],
        [0.0, 0.0, 2.5],
    ]
}

fn heat_kernel(ctx: &CheckContext) -> Result<Vec<Report>, HarnessError> {
    let cfg = &ctx.cfg;
    let r1m = HeatModel::euclidean(1, cfg.clone());
    let r2m = HeatModel::euclidean(2, cfg.clone());
    let h1m = HeatModel::heisenberg(HeatKind::H1Quadrature, cfg.clone())?;
    let pdem = HeatModel::heisenberg(HeatKind::H1Pde, cfg.clone())?.with_pde_settings(ctx.pde.clone());
    let r2grid = Grid::cube(2, 0.1, 256)?;

    // normalization
    let mut norm = Vec::new();
    let mass = |m: &HeatModel<f64>, t: f64, grid: &Grid<f64>| -> Result<f64, HarnessError> {
        Ok(m.kernel_field(t, grid)?.integral())
    };
    norm.push(("R1;t=1".to_string(), (mass(&r1m, 1.0, &r1_grid())? - 1.0).abs(), 1e-6));
    norm.push(("R2;t=1".to_string(), (mass(&r2m, 1.0, &r2grid)? - 1.0).abs(), 1e-6));
    norm.push(("H1;t=0.5".to_string(), (mass(&h1m, 0.5, &h1_grid())? - 1.0).abs(), 1e-3));
    let normalization = err_over_tol(
        "heat_normalization",
        "integral of h_t on the default grids",
        norm,
        Vec::new(),
    );

    // semigroup: T_s T_t f = T_{s+t} f
    let mut semi = Vec::new();
    let f = line_field(r1_grid(), |x| (-x * x).exp() * (1.0 + 0.3 * x))?;
    for (s, t) in [(0.3, 0.5), (1.0, 2.0)] {
        let two = r1m.semigroup_apply(s, &r1m.semigroup_apply(t, &f)?)?;
        let one = r1m.semigroup_apply(s + t, &f)?;
        let err = two.add_scaled(&one, -1.0)?.sup_norm() / one.sup_norm();
        semi.push((format!("R1;s={s};t={t}"), err, 1e-3));
    }
    // H¹: ∫ h_s(y) h_t(y⁻¹x) dy = h_{s+t}(x) by tensor Gauss–Legendre
    let (s, t) = (0.5, 0.5);
    let zrule: Vec<(f64, f64)> = GaussLegendre::<f64>::new(96).mapped(-6.0, 6.0).collect();
    let urule: Vec<(f64, f64)> = GaussLegendre::<f64>::new(192).mapped(-10.0, 10.0).collect();
    let g = h1m.group().clone();
    let h1_semi = h1_points()
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            let mut yinv = [0.0; 3];
            let mut z = [0.0; 3];
            for &(a, wa) in &zrule {
                for &(b, wb) in &zrule {
                    for &(c, wc) in &urule {
                        let y = [a, b, c];
                        g.inv_into(&y, &mut yinv);
                        g.mul_into(&yinv, x, &mut z);
                        acc += wa * wb * wc * h1m.heat_kernel(s, &y)? * h1m.heat_kernel(t, &z)?;
                    }
                }
            }
            let want = h1m.heat_kernel(s + t, x)?;
            Ok((
                format!("H1;s={s};t={t};x={x:?}"),
                (acc - want).abs() / h1m.heat_kernel(s + t, &[0.0; 3])?,
                1e-3,
            ))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    semi.extend(h1_semi);
    let semigroup = err_over_tol(
        "heat_semigroup",
        "R1 spectral composition (sup relative), H1 quadrature convolution at points (relative to peak)",
        semi,
        Vec::new(),
    );

    // scaling: h_{r²t}(D_r x) r^Q = h_t(x); on H¹ against the direct integral at t = 1
    let mut scal = Vec::new();
    for (r, t, x) in [(1.7, 0.3, 0.45), (0.4, 2.0, -1.3)] {
        let lhs = r1m.heat_kernel(r * r * t, &[r * x])? * r;
        let rhs = r1m.heat_kernel(t, &[x])?;
        scal.push((format!("R1;r={r};t={t}"), (lhs / rhs - 1.0).abs(), 1e-3));
    }
    for t in [0.5, 2.0] {
        let peak = h1m.heat_kernel(t, &[0.0; 3])?;
        for x in h1_points() {
            let rt = t.sqrt();
            let direct = h1_point((x[0] * x[0] + x[1] * x[1]).sqrt() / rt, x[2] / t).0 / (t * t);
            let err = (h1m.heat_kernel(t, &x)? - direct).abs() / peak;
            scal.push((format!("H1;t={t};x={x:?}"), err, 1e-3));
        }
    }
    let scaling = err_over_tol(
        "heat_scaling",
        "R1 dilation identity; H1 scaled kernel against direct integral (relative to peak)",
        scal,
        Vec::new(),
    );

    // symmetry: the sampled field at x against h_t(x⁻¹)
    let mut sym = Vec::new();
    for (label, m, grid) in [
        ("R1", &r1m, r1_grid()),
        ("R2", &r2m, r2grid.clone()),
        ("H1", &h1m, h1_grid()),
    ] {
        sym.push(Sample {
            label: label.into(),
            ratio: inverse_defect(m, &m.kernel_field(1.0, &grid)?)?,
        });
    }
    let symmetry = Report::new(
        "heat_symmetry",
        "max |h_1(x) - h_1(x^-1)| over grid nodes",
        sym,
        Criterion::MaxAtMost(0.0),
        Vec::new(),
    );

    // PDE path against the quadrature kernel at t = 1
    let peak = h1m.heat_kernel(1.0, &[0.0; 3])?;
    let mut pde = Vec::new();
    for x in h1_points() {
        let err = (pdem.heat_kernel(1.0, &x)? - h1m.heat_kernel(1.0, &x)?).abs() / peak;
        pde.push((format!("x={x:?}"), err, 0.05));
    }
    let pde_path = err_over_tol(
        "heat_pde_path",
        "H1 PDE kernel vs quadrature kernel at t=1 (relative to peak)",
        pde,
        Vec::new(),
    );
    Ok(vec![normalization, semigroup, scaling, symmetry, pde_path])
}

/// max |h(x) − h_1(x⁻¹)| over the nodes of a sampled kernel h.
fn inverse_defect(m: &HeatModel<f64>, h: &SampledField<f64>) -> Result<f64, HarnessError> {
    let g = m.group();
    let grid = h.grid();
    let mut x = vec![0.0; grid.dim()];
    let mut xi = vec![0.0; grid.dim()];
    let mut worst = 0.0f64;
    for (flat, v) in h.values().iter().enumerate() {
        grid.coords_of(flat, &mut x);
        g.inv_into(&x, &mut xi);
        worst = worst.max((v - m.heat_kernel(1.0, &xi)?).abs());
    }
    Ok(worst)
}

fn strichartz_family(seed: u64, grid: &Grid<f64>) -> Result<Vec<(String, SampledField<f64>)>, HarnessError> {
    let fam = TestFamily::<f64>::seeded(seed, 6, &[3.0]).sample(&r1(), grid, 8)?;
    Ok(fam.fine)
}

fn strichartz_equivalence(ctx: &CheckContext) -> Result<Vec<Report>, HarnessError> {
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    let coarse_grid = r1_grid();
    let fine_grid = coarse_grid.refined();
    let coarse = strichartz_family(ctx.seed, &coarse_grid)?;
    let fine = strichartz_family(ctx.seed, &fine_grid)?;
    let mut out = Vec::new();
    for (order, s) in [
        (DifferenceOrder::First, 0.5),
        (DifferenceOrder::Second, 0.5),
        (DifferenceOrder::Second, 1.5),
    ] {
        let prm = StrichartzParams::new(order, s, 2.0)?;
        let base = equivalence_report(&m, &coarse, &prm, 10.0);
        let refined = equivalence_report(&m, &fine, &prm, 10.0);
        let stability = stability_of(&base, &refined);
        let report = base
            .with_metric("grid_doubling_ratio", stability)
            .with_criterion(Criterion::All(vec![
                Criterion::SpreadBelow(10.0),
                Criterion::MetricAtLeast("grid_doubling_ratio".into(), 0.8),
                Criterion::MetricAtMost("grid_doubling_ratio".into(), 1.2),
            ]));
        out.push(report);
    }
    Ok(out)
}

/// Largest deviation from 1 of the per-member ratio refined/base, returned
/// as that ratio.
fn stability_of(base: &Report, refined: &Report) -> f64 {
    let mut worst = 1.0f64;
    for (a, b) in base.samples.iter().zip(&refined.samples) {
        let q = b.ratio / a.ratio;
        if (q - 1.0).abs() > (worst - 1.0).abs() || !q.is_finite() {
            worst = q;
        }
    }
    if base.samples.len() != refined.samples.len() || base.samples.is_empty() {
        f64::NAN
    } else {
        worst
    }
}

fn counterexamples() -> Result<Report, HarnessError> {
    let eps: Vec<f64> = (8..=20).map(|k| 2f64.powi(-k)).collect();
    let mut samples = Vec::new();
    let mut deviation = 0.0f64;
    for (order, s, cap) in [(DifferenceOrder::First, 1.5, 1.0), (DifferenceOrder::Second, 2.5, 2.0)] {
        let slope = counterexample_exponent(order, s, &eps)?;
        deviation = deviation.max((slope + (s - cap)).abs());
        samples.push(Sample {
            label: format!("{};s={s}", order.name()),
            ratio: slope,
        });
    }
    Ok(Report::new(
        "counterexamples",
        "log-log slope of the epsilon-truncated functional, expected -(s - cap)",
        samples,
        Criterion::MetricAtMost("max_slope_deviation".into(), 0.05),
        Vec::new(),
    )
    .with_metric("max_slope_deviation", deviation))
}

/// 64³ nodes over z ∈ [−3.2, 3.1]², u ∈ [−6.4, 6.2]: finer than the default
/// H¹ box so that the coarsened copy still resolves second derivatives.
fn h1_mv_grid() -> Grid<f64> {
    Grid::new(vec![
        Axis::centered(0.1, 64).expect("valid axis"),
        Axis::centered(0.1, 64).expect("valid axis"),
        Axis::centered(0.2, 64).expect("valid axis"),
    ])
    .expect("valid grid")
}

fn h1_family(ctx: &CheckContext, count: usize, extent: &[f64]) -> Result<FieldFamily<f64>, HarnessError> {
    let g = Arc::new(GroupSpec::heisenberg());
    Ok(TestFamily::<f64>::seeded(ctx.seed, count, extent).sample(&g, &h1_mv_grid(), 4)?)
}

/// `count` shifts with lo ≤ |y| ≤ hi.
fn h1_shifts(ctx: &CheckContext, count: usize, lo: f64, hi: f64) -> Vec<Point<f64>> {
    let g = GroupSpec::heisenberg();
    shift_samples(&g, ctx.seed ^ 0x5eed, 16 * count, hi)
        .into_iter()
        .filter(|y| g.norm_of(&y.0, QuasiNorm::Smooth) >= lo)
        .take(count)
        .collect()
}

/// Ten members, twenty shifts with |y| ≤ 1.
fn mv_first_lp(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let r = check_mv_first_lp(
        &h1_family(ctx, 10, &[0.9, 0.9, 1.8])?,
        2.0,
        &h1_shifts(ctx, 20, 0.0, 1.0),
    )?;
    let c = Criterion::All(vec![Criterion::Finite, Criterion::StabilityWithin(0.75, 1.25)]);
    Ok(r.with_criterion(c))
}

/// Second differences at |y| below 0.2 fall under the interpolation error
/// of the coarse grid, so the second-order checks use 0.2 ≤ |y| ≤ 0.4.
fn second_order_inputs(ctx: &CheckContext) -> Result<(FieldFamily<f64>, Vec<Point<f64>>), HarnessError> {
    Ok((h1_family(ctx, 5, &[1.4, 1.4, 2.6])?, h1_shifts(ctx, 8, 0.2, 0.4)))
}

fn mv_second_lp(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let (family, ys) = second_order_inputs(ctx)?;
    let r = check_mv_second_lp(&family, 2.0, &ys)?;
    let grid_error = r.metric("grid_error").unwrap_or(f64::NAN);
    let c = Criterion::All(vec![
        Criterion::Finite,
        Criterion::StabilityWithin(0.75, 1.25),
        Criterion::MaxAtMost(1.0 + 5.0 * grid_error),
    ]);
    Ok(r.with_criterion(c))
}

fn mv_second_pointwise(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let (family, ys) = second_order_inputs(ctx)?;
    Ok(check_mv_second_pointwise(&family, &ys)?)
}

fn line_family(ctx: &CheckContext) -> Result<FieldFamily<f64>, HarnessError> {
    let grid = Grid::new(vec![Axis::symmetric(12.0, 2401)?])?;
    Ok(TestFamily::<f64>::seeded(ctx.seed, 6, &[3.0]).sample(&r1(), &grid, 8)?)
}

fn w1p_characterization(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let ys = shift_samples(&GroupSpec::euclidean(1), ctx.seed ^ 0x5eed, 10, 1.0);
    Ok(check_w1p_characterization(&line_family(ctx)?, 2.0, &ys)?)
}

fn pseudo_poincare(ctx: &CheckContext) -> Result<Report, HarnessError> {
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    Ok(check_pseudo_poincare(
        &m,
        &line_family(ctx)?,
        &(1..=10).collect::<Vec<_>>(),
    )?)
}

fn g_s_identity(ctx: &CheckContext) -> Result<Report, HarnessError> {
    // the fractional power has |x|^{−1−s/2} tails: wide box, compare the middle
    let m = HeatModel::euclidean(1, ctx.cfg.clone());
    let f = line_field(Grid::cube(1, 0.01, 16384)?, |x| (-x * x).exp())?;
    let s = 0.5;
    let gs = g_s(&m, &f, s, &ctx.cfg)?;
    let rf = frac_power_spectral(&m, &f, s / 2.0)?;
    let comp = g_alpha(&m, &rf, 1.0 - s / 2.0, &ctx.cfg)?;
    let peak = gs.field.sup_norm();
    let samples = (8192 - 1000..=8192 + 1000)
        .step_by(50)
        .map(|i| Sample {
            label: format!("x={:.2}", f.grid().point(i)[0]),
            ratio: (gs.field.values()[i] - comp.field.values()[i]).abs() / peak,
        })
        .collect::<Vec<_>>();
    let worst = (8192 - 1000..=8192 + 1000)
        .map(|i| (gs.field.values()[i] - comp.field.values()[i]).abs() / peak)
        .fold(0.0, f64::max);
    Ok(Report::new(
        "g_s_identity",
        "R1 gaussian s=0.5, |G_s f - g_(1-s/2)(R^(s/2) f)| / sup G_s f on [-10,10]",
        samples,
        Criterion::MetricAtMost("max_error".into(), 1e-3),
        Vec::new(),
    )
    .with_metric("max_error", worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_all_and_unknown() {
        let all = expand(&["all".into()]).unwrap();
        assert_eq!(all.len(), CHECK_NAMES.len());
        assert!(matches!(expand(&["nope".into()]), Err(HarnessError::Usage(_))));
    }

    #[test]
    fn cheap_checks_pass() {
        let ctx = CheckContext {
            seed: 1,
            cfg: QuadratureConfig::default(),
            pde: PdeSettings::default(),
        };
        for name in ["counterexamples", "psi_identities"] {
            for r in run_check(name, &ctx).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }
}
