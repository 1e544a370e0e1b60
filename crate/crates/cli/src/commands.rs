use anyhow::bail;
use qgeo::extrinsic::ExtrinsicPack;
use qgeo::invariants::{lookup, spec, Evaluator, InvOptions, REGISTRY};
use qgeo::renorm::{c_k, fit_range, renorm_gb_check, HyperbolicModel};
use qgeo::report::{Check, QuantityRecord, Report};
use qgeo::scene::CATALOG;
use qgeo::submanifold::{FrameOptions, Submanifold};
use qgeo::suites::{self, Suite, SuiteOptions};

use crate::scene_file::{ConfigError, SceneFile};

pub const DEFAULT_EVAL_TOL: f64 = 1e-8;

/// Evaluate invariants on each scene at each of its points; expectations in
/// the scene files become checks.
pub fn eval(files: &[SceneFile], seed: u64, tol: Option<f64>) -> anyhow::Result<Report> {
    let mut quantities = Vec::new();
    let mut checks = Vec::new();
    let opts = InvOptions::default();
    let mut labels = Vec::new();
    for f in files {
        let s = f.scene()?;
        labels.push(s.name.clone());
        let (k, n) = (s.patch.k(), s.patch.n());
        let ids: Vec<_> = if f.quantities.is_empty() {
            REGISTRY.iter().filter(|sp| sp.is_valid(k, n, &opts)).map(|sp| sp.id).collect()
        } else {
            f.quantities.iter().filter_map(|q| lookup(q)).map(|sp| sp.id).collect()
        };
        for id in &ids {
            if !spec(*id).is_valid(k, n, &opts) {
                bail!(ConfigError(format!(
                    "{} is not defined for k={k}, n={n} ({})",
                    spec(*id).name,
                    spec(*id).domain
                )));
            }
        }
        let points = if f.points.is_empty() { vec![s.patch.base.clone()] } else { f.points.clone() };
        for p in points {
            let sub = Submanifold::<f64>::new(&s.metric, &s.patch.at(p.clone()), &FrameOptions::default())?;
            let ext = ExtrinsicPack::new(&sub)?;
            let ev = Evaluator::new(&sub, &ext, opts);
            for id in &ids {
                let v = ev.value(*id)?;
                if let Some(want) = f
                    .expect
                    .get(v.name.as_str())
                    .or_else(|| f.expect.iter().find(|(key, _)| key.eq_ignore_ascii_case(&v.name)).map(|(_, w)| w))
                {
                    let t = tol.or(f.tolerance).unwrap_or(DEFAULT_EVAL_TOL);
                    let r = (v.value - want).abs() / (1.0 + want.abs());
                    checks.push(
                        Check::below("eval", format!("{} on {} at {p:?}", v.name, s.name), "expected value", r, t)
                            .with_values(vec![v.value, *want]),
                    );
                }
                quantities.push(QuantityRecord {
                    scene: s.name.clone(),
                    point: p.clone(),
                    name: v.name,
                    value: v.value,
                    weight: Some(v.weight),
                });
            }
        }
    }
    Ok(Report::new(format!("eval {}", labels.join(",")), seed, checks).with_quantities(quantities))
}

/// Every catalog scene at its base point.
pub fn catalog_files(seed: u64) -> Vec<SceneFile> {
    CATALOG.iter().map(|c| SceneFile::catalog(c, seed)).collect()
}

pub fn verify(suite: Suite, opts: &SuiteOptions, tol: Option<f64>) -> Report {
    let mut checks = suites::run(suite, opts);
    if let Some(t) = tol {
        for c in &mut checks {
            c.retolerate(t);
        }
    }
    Report::new(format!("verify {}", suite.name()), opts.seed, checks)
}

pub struct RenormArgs {
    pub k: usize,
    pub n: Option<usize>,
    pub radius: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub samples: usize,
}

pub fn renorm(a: &RenormArgs, tol: Option<f64>) -> anyhow::Result<Report> {
    let n = a.n.unwrap_or(a.k + 1);
    let model = HyperbolicModel::new(a.k, n, a.radius)?;
    if !(a.eps_min > 0.0 && a.eps_min < a.eps_max && a.eps_max < a.radius) {
        bail!(ConfigError(format!(
            "need 0 < eps-min < eps-max < R, got [{}, {}] with R = {}",
            a.eps_min, a.eps_max, a.radius
        )));
    }
    let fit = fit_range(&model, a.eps_min, a.eps_max, a.samples)?;
    let gb = renorm_gb_check(&model, 5)?;
    let label = format!("hemisphere k={} n={n} R={}", a.k, a.radius);
    let mut quantities: Vec<QuantityRecord> = fit
        .powers
        .iter()
        .zip(&fit.coefficients)
        .map(|(p, c)| QuantityRecord {
            scene: label.clone(),
            point: Vec::new(),
            name: format!("coefficient of eps^{p}"),
            value: *c,
            weight: None,
        })
        .collect();
    for (name, value) in [
        ("renormalized area", fit.renormalized_area),
        ("c_k chi", c_k(a.k)),
        ("fit relative residual", fit.relative_residual),
        ("condition number", fit.condition),
    ] {
        quantities.push(QuantityRecord {
            scene: label.clone(),
            point: Vec::new(),
            name: name.into(),
            value,
            weight: None,
        });
    }
    let t = tol.unwrap_or(suites::tol::RENORM);
    let mut area = Check::below(
        "renorm-area",
        format!("A = c_k chi on {label}"),
        "renormalized area",
        (fit.renormalized_area - c_k(a.k)).abs(),
        t,
    )
    .with_values(vec![fit.renormalized_area, c_k(a.k)]);
    if let Some(w) = &fit.warning {
        area = area.with_note(w.clone());
    }
    let pointwise = gb.max_h.max(gb.max_lt).max(gb.max_weyl).max(gb.max_integrand);
    let checks = vec![
        area,
        Check::below("renorm-area", "fit residual", "renormalized area", fit.relative_residual, 1e-8),
        Check::below("renorm-area", "vanishing integrand", "renormalized area", pointwise, suites::tol::INTEGRAND),
    ];
    Ok(Report::new(format!("renorm {label}"), 0, checks).with_quantities(quantities))
}

pub fn list() -> String {
    let mut s = String::from("invariants (name, weight, domain):\n");
    for sp in REGISTRY {
        s += &format!("  {:<18} {:>3}  {}\n", sp.name, sp.weight, sp.domain);
    }
    s += "catalog scenes:\n";
    for c in CATALOG {
        s += &format!("  {c}\n");
    }
    s += "  random-k<K>-n<N>\n";
    s += "suites:\n";
    for su in Suite::ALL {
        s += &format!("  {}\n", su.name());
    }
    s
}
