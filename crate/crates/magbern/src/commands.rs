//! Command dispatch. Each command returns a [`ReportBundle`]; nothing here
//! touches the file system except reading input masks.

use std::path::Path;

use magbern_core::algebra::{
    bernstein_constant, check_f_bounds, f_poly, verify_recursion, weyl3d_report, BernsteinVariant,
};
use magbern_core::control::{cost_bound_ln, hum_control, CostConstants, HeatProblem};
use magbern_core::geometry::{thickness_scan, SetMask};
use magbern_core::inequality::{
    empirical_constant, kovrijkine_check, remez_check, theoretical_constant_ln, ComplexPoly, IntervalSet, ThmConstants,
};
use magbern_core::landau::{bernstein_sum, l1_bernstein_sum, GridField, LevelCombination, LevelPart, QuadratureSpec};
use magbern_core::lattice::{assemble, eigensolve, Cutoff, EigenConfig, SpectralSubspace, TorusSetup};
use magbern_core::random::{
    box_exponent, sample_operator, window_counts, CouplingLaw, EnsembleConfig, SiteProfile, WegnerStats,
};
use magbern_core::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{plot_data, read_pbm_file, Table};

/// Everything a run produces. Written by [`crate::write_bundle`].
#[derive(Clone, Debug, Default)]
pub struct ReportBundle {
    /// Text for standard output.
    pub stdout: String,
    /// `(file stem, table)`; written as `<stem>.csv`.
    pub tables: Vec<(String, Table)>,
    /// `(file stem, data)`; written as `<stem>.dat`.
    pub plots: Vec<(String, String)>,
    pub manifest: String,
    /// Process exit status: 0, or 5 when a checked inequality failed.
    pub status: i32,
    /// Human-readable notes for standard error.
    pub notes: Vec<String>,
}

impl ReportBundle {
    fn new(cfg: &RunConfig) -> Self {
        Self { manifest: cfg.manifest(), ..Self::default() }
    }

    /// Makes the first table the standard output.
    fn with_table(mut self, stem: &str, t: Table) -> Self {
        if self.tables.is_empty() && self.stdout.is_empty() {
            self.stdout = t.to_csv();
        }
        self.tables.push((stem.to_string(), t));
        self
    }

    fn with_plot(mut self, stem: &str, pts: &[(f64, f64)]) -> Self {
        self.plots.push((stem.to_string(), plot_data(pts)));
        self
    }

    fn falsified(&mut self, what: String) {
        self.status = CliError::Falsified(String::new()).exit_code();
        self.notes.push(what);
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn run(cfg: &RunConfig) -> CliResult<ReportBundle> {
    match cfg.command.as_str() {
        "fm" => run_fm(cfg),
        "weyl-verify" => run_weyl(cfg),
        "bernstein" => run_bernstein(cfg),
        "thickness" => run_thickness(cfg),
        "specineq" => run_specineq(cfg),
        "remez" => run_remez(cfg),
        "control" => run_control(cfg),
        "wegner" => run_wegner(cfg),
        other => Err(CliError::Config(format!("unknown command `{other}`"))),
    }
}

fn run_fm(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let m = cfg.u32("m")?;
    let f = f_poly(m);
    let mut t = Table::new(&["m", "F_m"]);
    t.push(vec![m.to_string(), f.to_string()]);
    // F_m((2k+1)B)/B^m on the first levels, for plotting
    let pts: Vec<(f64, f64)> = (0..8).map(|k| (k as f64, f.eval_f64((2 * k + 1) as f64, 1.0))).collect();
    let mut b = ReportBundle::new(cfg);
    b.stdout = format!("{f}\n");
    Ok(b.with_table("fm", t).with_plot("fm", &pts))
}

fn run_weyl(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let m_max = cfg.u32("m_max")?;
    let field = cfg.rationals("field")?;
    let power = cfg.u32("power")?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new(&["check", "m", "k", "result", "detail"]);
    for m in 1..=m_max {
        let ok = verify_recursion(m)?;
        if !ok {
            b.falsified(format!("R^{m}(Id) differs from F_{m}(H)"));
        }
        t.push(vec!["recursion".into(), m.to_string(), String::new(), ok.to_string(), f_poly(m).to_string()]);
    }
    for m in 1..=m_max {
        for k in 0..=m_max {
            let ok = check_f_bounds(m, k);
            if !ok {
                b.falsified(format!("level bounds fail for m={m}, k={k}"));
            }
            t.push(vec!["f_bounds".into(), m.to_string(), k.to_string(), ok.to_string(), String::new()]);
        }
    }
    let r = weyl3d_report(&field[0], &field[1], &field[2], power)?;
    let witness = match &r.witness {
        Some((mono, c)) => format!("d1^{}*d2^{}*d3^{} coefficient {c}", mono[0], mono[1], mono[2]),
        None => String::new(),
    };
    let field_s = field.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
    t.push(vec![
        "weyl3d_counterexample".into(),
        power.to_string(),
        field_s,
        r.is_counterexample().to_string(),
        witness,
    ]);
    Ok(b.with_table("weyl_verify", t))
}

/// Random combination of Landau states `Σ c (∂̃1 − i∂̃2)^k f_y` with
/// levels `k ≤ levels`.
pub fn random_combination(rng: &mut ChaCha8Rng, b: f64, levels: usize) -> LevelCombination {
    let n = rng.random_range(1..=4);
    let spread = 1.5 / b.sqrt();
    let parts = (0..n)
        .map(|_| LevelPart {
            y: [rng.random_range(-spread..spread), rng.random_range(-spread..spread)],
            k: rng.random_range(0..=levels),
            coeff: C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
        .collect();
    LevelCombination { b, parts }
}

fn run_bernstein(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let bf = cfg.real("B")?;
    let samples = cfg.usize("samples")?;
    let m_max = cfg.u32("m_max")?;
    let levels = cfg.usize("levels")?;
    let tol = cfg.real("tol")?;
    let tol_l1 = cfg.real("tol_l1")?;
    let e = (2 * levels + 1) as f64 * bf;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let combos: Vec<LevelCombination> = (0..samples).map(|_| random_combination(&mut rng, bf, levels)).collect();
    let rows = pool(cfg)?.install(|| {
        combos
            .par_iter()
            .map(|lc| -> CliResult<Vec<[f64; 7]>> {
                let sym = lc.to_symbolic();
                let grid = QuadratureSpec::for_field(bf).grid_around(&sym.centers())?;
                let f = GridField::sample(&sym, grid);
                let norm = lc.norm_sqr();
                (0..=m_max)
                    .map(|m| {
                        let sum = bernstein_sum(&f, m, bf, 1e-6)?.value;
                        let l1 = l1_bernstein_sum(&f, m, 1e-6).value;
                        Ok([
                            f64::from(m),
                            norm,
                            sum,
                            lc.fm_expectation(m),
                            bernstein_constant(m, e, bf, BernsteinVariant::L2)? * norm,
                            l1,
                            bernstein_constant(m, e, bf, BernsteinVariant::L1)? * norm,
                        ])
                    })
                    .collect()
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new(&[
        "sample", "m", "E", "norm_sq", "sum_l2", "fm_expectation", "bound_l2", "pass_l2", "sum_l1", "bound_l1", "pass_l1",
        "fm_rel_err",
    ]);
    let mut pts = Vec::new();
    for (s, per_m) in rows.iter().enumerate() {
        for r in per_m {
            let [m, norm, sum, fm, bound, l1, l1_bound] = *r;
            let pass2 = sum <= bound * (1.0 + tol);
            let pass1 = l1 <= l1_bound * (1.0 + tol_l1);
            let rel = (sum - fm).abs() / fm.abs().max(f64::MIN_POSITIVE);
            if !pass2 || !pass1 || rel > tol {
                b.falsified(format!("sample {s}, m = {m}: l2 {pass2}, l1 {pass1}, relative F_m error {rel:e}"));
            }
            pts.push((m, sum / bound));
            t.push(vec![
                s.to_string(),
                num(m),
                num(e),
                num(norm),
                num(sum),
                num(fm),
                num(bound),
                pass2.to_string(),
                num(l1),
                num(l1_bound),
                pass1.to_string(),
                num(rel),
            ]);
        }
    }
    Ok(b.with_table("bernstein", t).with_plot("bernstein_ratio", &pts))
}

fn run_thickness(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let path = cfg.path("mask").expect("required key");
    let h = cfg.real("h")?;
    let l = cfg.pair("l")?.expect("no auto for thickness");
    let mask = read_pbm_file(&path, [h, h], [0.0, 0.0], cfg.flag("periodic"))?;
    let r = thickness_scan(&mask, l)?;
    let mut t = Table::new(&["l1", "l2", "rho_lower", "anchor_x", "anchor_y", "rho_grid", "cells_x", "cells_y"]);
    t.push(vec![
        num(l[0]),
        num(l[1]),
        num(r.rho_lower),
        num(r.anchor[0]),
        num(r.anchor[1]),
        num(r.rho_grid),
        r.cells[0].to_string(),
        r.cells[1].to_string(),
    ]);
    Ok(ReportBundle::new(cfg).with_table("thickness", t))
}

/// Torus, subspace size and mask shared by `specineq` and `control`.
struct LatticeSetup {
    setup: TorusSetup,
    mask: SetMask,
    l: [f64; 2],
    rho: f64,
}

fn lattice_setup(cfg: &RunConfig) -> CliResult<LatticeSetup> {
    let bf = cfg.real("B")?;
    let n = cfg.usize("N")?;
    let setup = TorusSetup::square_with_flux(cfg.u32("n_phi")?, bf, n)?;
    let hh = setup.h();
    let mask = match cfg.path("mask") {
        Some(p) => {
            let m = read_pbm_file(&p, hh, [-0.5 * hh[0], -0.5 * hh[1]], true)?;
            if m.n != setup.n {
                return Err(CliError::Format(format!(
                    "{}: mask is {}x{}, the torus grid is {n}x{n}",
                    p.display(),
                    m.n[0],
                    m.n[1]
                )));
            }
            m
        }
        None => {
            let block = cfg.usize("block")?;
            match cfg.str("pattern") {
                "strips" => SetMask::on_torus(&setup, |i1, _| i1 % (2 * block) < block)?,
                _ => SetMask::on_torus(&setup, |i1, i2| (i1 / block + i2 / block) % 2 == 0)?,
            }
        }
    };
    let l = cfg.pair("l")?.unwrap_or([0.25 * setup.l[0], 0.25 * setup.l[1]]);
    let certified = thickness_scan(&mask, l)?.rho_lower;
    let rho = match cfg.rho("rho")? {
        None => certified,
        Some(r) if r <= certified => r,
        Some(r) => {
            return Err(CliError::Config(format!(
                "--rho {r}: the mask is only certified ({}, {certified})-thick",
                l.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
            )))
        }
    };
    if !(rho > 0.0) {
        return Err(CliError::Config("the mask misses an l-window entirely; increase --l".into()));
    }
    Ok(LatticeSetup { setup, mask, l, rho })
}

/// Lowest `n_phi · clusters` eigenpairs.
fn landau_subspace(setup: &TorusSetup, clusters: usize) -> CliResult<SpectralSubspace> {
    let op = assemble(setup, None)?;
    let k = setup.flux_quanta()? as usize * clusters;
    Ok(eigensolve(&op, Cutoff::Count(k), &EigenConfig::default())?)
}

fn run_specineq(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let bf = cfg.real("B")?;
    let e = cfg.energy("E")?;
    if e < bf * (1.0 - 1e-12) {
        return Err(CliError::Config(format!("--E {}: below the lowest level B = {bf}", cfg.str("E"))));
    }
    let ls = lattice_setup(cfg)?;
    // Landau levels (2k+1)B ≤ E
    let clusters = (((e / bf) * (1.0 + 1e-12) - 1.0) / 2.0).floor() as usize + 1;
    let sub = landau_subspace(&ls.setup, clusters)?;
    let c_emp = empirical_constant(&sub, &ls.mask)?;
    let ln_traced = theoretical_constant_ln(e, bf, ls.l, ls.rho, ThmConstants::Traced)?;
    let pass = c_emp.ln() <= ln_traced;
    let mut b = ReportBundle::new(cfg);
    if !pass {
        b.falsified(format!("empirical constant {c_emp} exceeds the traced bound"));
    }
    let mut t = Table::new(&[
        "E", "B", "l1", "l2", "rho", "C_emp", "C_traced", "pass", "ln_C_emp", "ln_C_traced", "subspace_dim",
    ]);
    t.push(vec![
        num(e),
        num(bf),
        num(ls.l[0]),
        num(ls.l[1]),
        num(ls.rho),
        num(c_emp),
        num(ln_traced.exp()),
        pass.to_string(),
        num(c_emp.ln()),
        num(ln_traced),
        sub.len().to_string(),
    ]);
    Ok(b.with_table("specineq", t))
}

fn random_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> ComplexPoly {
    let d = rng.random_range(0..=max_deg);
    ComplexPoly::new((0..=d).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
}

fn random_set(rng: &mut ChaCha8Rng) -> CliResult<IntervalSet> {
    let n = rng.random_range(1..=3);
    let parts = (0..n)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..0.95);
            (a, (a + rng.random_range(0.005..0.05)).min(1.0))
        })
        .collect();
    Ok(IntervalSet::new(parts)?)
}

fn run_remez(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let trials = cfg.usize("trials")?;
    let dmax = cfg.usize("degree_max")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut cases = Vec::with_capacity(2 * trials);
    for i in 0..trials {
        cases.push((i, "remez", random_poly(&mut rng, dmax), random_set(&mut rng)?));
    }
    let mut i = 0;
    while i < trials {
        let p = random_poly(&mut rng, dmax);
        let c0 = p.coeffs[0];
        if c0.norm() < 1e-3 {
            continue;
        }
        let p = ComplexPoly::new(p.coeffs.iter().map(|c| c / c0).collect());
        cases.push((i, "kovrijkine", p, random_set(&mut rng)?));
        i += 1;
    }
    let rows = pool(cfg)?.install(|| {
        cases
            .par_iter()
            .map(|(i, kind, p, set)| -> CliResult<(usize, &str, usize, f64, f64, f64, f64, bool)> {
                if *kind == "remez" {
                    let r = remez_check(p, set)?;
                    Ok((*i, kind, p.degree(), set.measure(), r.sup_unit, r.sup_set, r.bound.ln(), r.holds))
                } else {
                    let r = kovrijkine_check(p, set)?;
                    Ok((*i, kind, p.degree(), set.measure(), r.sup_unit, r.sup_set, r.ln_factor, r.holds))
                }
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new(&["trial", "check", "degree", "measure", "sup_unit", "sup_set", "ln_factor", "holds"]);
    let mut pts = Vec::new();
    for (i, kind, d, meas, su, ss, lf, holds) in rows {
        if !holds {
            b.falsified(format!("{kind} trial {i} fails"));
        }
        if kind == "remez" {
            // ln(sup ratio) against ln of the bound
            pts.push((lf, (su / ss).ln()));
        }
        t.push(vec![i.to_string(), kind.to_string(), d.to_string(), num(meas), num(su), num(ss), num(lf), holds.to_string()]);
    }
    Ok(b.with_table("remez", t).with_plot("remez_ratio", &pts))
}

fn run_control(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let bf = cfg.real("B")?;
    let ls = lattice_setup(cfg)?;
    let sub = landau_subspace(&ls.setup, cfg.usize("levels")?)?;
    let e_max = sub.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = cfg.real("eps")?;
    let consts = CostConstants { c5: cfg.real("c5")?, c6: cfg.real("c6")?, c7: cfg.real("c7")? };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let mut u0: Vec<C> = (0..sub.len()).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let n0 = u0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    u0.iter_mut().for_each(|z| *z /= n0);
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new(&[
        "T", "rho", "l1", "l2", "B", "E_max", "hum_cost", "bound_traced", "residual", "pass", "ln_hum_cost",
        "ln_bound_traced",
    ]);
    let mut traj = Table::new(&["T", "t", "state_norm", "control_norm"]);
    let mut pts = Vec::new();
    for horizon in cfg.list("T")? {
        let p = HeatProblem::new(&sub, &ls.mask, horizon, u0.clone())?;
        let r = hum_control(&p, eps)?;
        // the bound is on the squared cost
        let ln_bound = 0.5 * cost_bound_ln(ls.rho, ls.l, bf, horizon, ThmConstants::Traced, consts)?;
        let pass = r.cost.ln() <= ln_bound;
        if !pass {
            b.falsified(format!("HUM cost {} exceeds the traced bound at T = {horizon}", r.cost));
        }
        pts.push((horizon, r.cost.ln()));
        t.push(vec![
            num(horizon),
            num(ls.rho),
            num(ls.l[0]),
            num(ls.l[1]),
            num(bf),
            num(e_max),
            num(r.cost),
            num(ln_bound.exp()),
            num(r.terminal_residual),
            pass.to_string(),
            num(r.cost.ln()),
            num(ln_bound),
        ]);
        if cfg.flag("trajectory") {
            for (ti, phi) in r.times.iter().zip(&r.control) {
                let u = r.state_at(&p, *ti)?;
                let un = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let mut fs = 0.0;
                for i in 0..phi.len() {
                    for j in 0..phi.len() {
                        fs += (phi[i].conj() * p.form[(i, j)] * phi[j]).re;
                    }
                }
                traj.push(vec![num(horizon), num(*ti), num(un), num(fs.max(0.0).sqrt())]);
            }
        }
    }
    b = b.with_table("control", t).with_plot("control_ln_cost", &pts);
    if cfg.flag("trajectory") {
        b.tables.push(("control_trajectory".into(), traj));
    }
    Ok(b)
}

fn pool(cfg: &RunConfig) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers())
        .build()
        .map_err(|e| CliError::Core(magbern_core::Error::Resource(format!("thread pool: {e}"))))
}

/// Trials run in parallel but are collected in trial order, so the counts
/// do not depend on the number of workers.
pub fn wegner_stats(config: &EnsembleConfig, e: f64, eps: &[f64], trials: usize, workers: usize) -> CliResult<WegnerStats> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Core(magbern_core::Error::Resource(format!("thread pool: {e}"))))?;
    let counts = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| window_counts(&sample_operator(config, t)?, e, eps))
            .collect::<magbern_core::Result<Vec<_>>>()
    })?;
    Ok(WegnerStats::from_counts(config.setup.l, e, eps.to_vec(), config.law, counts)?)
}

fn run_wegner(cfg: &RunConfig) -> CliResult<ReportBundle> {
    let bf = cfg.real("B")?;
    let e = cfg.energy("E")?;
    let eps = cfg.list("eps")?;
    if eps.len() < 2 {
        return Err(CliError::Config("--eps: need at least two half-widths".into()));
    }
    let law = CouplingLaw::Uniform { lo: cfg.real("m0")?, hi: cfg.real("M0")? };
    let profile = SiteProfile::CantorDisk { radius: cfg.real("radius")?, levels: cfg.u32("cantor_levels")? };
    let cells = cfg.usize("cells")?;
    let trials = cfg.usize("trials")?;
    let sizes = cfg.list("L")?;
    let mut b = ReportBundle::new(cfg);
    let mut t = Table::new(&["L", "E", "eps", "mean_count", "stderr", "s2eps", "ratio", "trials"]);
    let mut all = Vec::new();
    for &l in &sizes {
        if l.fract() != 0.0 {
            return Err(CliError::Config(format!("--L {l}: box sides must be integers")));
        }
        let n = (l as usize) * cells;
        let setup = TorusSetup::new([l, l], bf, [n, n])?;
        let config = EnsembleConfig::new(setup, profile, law, cfg.seed())?;
        let st = wegner_stats(&config, e, &eps, trials, cfg.workers())?;
        for k in 0..eps.len() {
            t.push(vec![
                num(l),
                num(e),
                num(eps[k]),
                num(st.mean[k]),
                num(st.stderr[k]),
                num(st.s2eps[k]),
                num(st.ratio(k)),
                trials.to_string(),
            ]);
        }
        all.push(st);
    }
    let mut fit = Table::new(&["eps", "L_exponent", "L_exponent_stderr", "max_ratio"]);
    if sizes.len() >= 2 {
        for (k, w) in eps.iter().enumerate() {
            let means: Vec<f64> = all.iter().map(|s| s.mean[k]).collect();
            let ratio = all.iter().map(|s| s.ratio(k)).fold(0.0, f64::max);
            let (slope, se) = match box_exponent(&sizes, &means) {
                Ok(f) => (num(f.slope), num(f.slope_stderr)),
                Err(_) => ("nan".into(), "nan".into()),
            };
            fit.push(vec![num(*w), slope, se, num(ratio)]);
        }
    }
    let pts: Vec<(f64, f64)> = all.last().map(|s| eps.iter().copied().zip(s.mean.iter().copied()).collect()).unwrap_or_default();
    b = b.with_table("wegner", t).with_plot("wegner_mean_vs_eps", &pts);
    b.tables.push(("wegner_fit".into(), fit));
    Ok(b)
}

/// Writes tables, plot data and the manifest below `dir`.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let put = |name: String, text: &str| {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    for (stem, t) in &bundle.tables {
        put(format!("{stem}.csv"), &t.to_csv())?;
    }
    for (stem, d) in &bundle.plots {
        put(format!("{stem}.dat"), d)?;
    }
    put("manifest.txt".into(), &bundle.manifest)
}
