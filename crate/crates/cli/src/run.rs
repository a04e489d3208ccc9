//! Training, grid sweeps and artifact output.

use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use nnfd::convergence::format_e16;
use nnfd::fast_poisson::GridField;
use nnfd::hybrid::{self, ErrorNorms, HybridSolution, PoissonInterfaceProblem};
use nnfd::problems::ErrorMode;
use nnfd::shallow_net::ShallowNet;
use nnfd::stokes::{self, StokesProblem, StokesSolution};
use nnfd::training::TrainReport;

use crate::config::{Experiment, ExperimentKind};
use crate::table::{ConvergenceTable, Row};

pub const POISSON_QUANTITIES: [&str; 2] = ["u", "grad"];
pub const STOKES_QUANTITIES: [&str; 5] = ["u1", "u2", "p", "divu", "gradp"];

#[derive(Debug, Clone)]
pub struct TrainedNet {
    pub net: ShallowNet,
    pub report: TrainReport,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ConvergenceTable,
    /// Nets in training order: one, or one per grid with `retrain`.
    pub nets: Vec<(usize, TrainedNet)>,
    /// Largest `|u − u_b|` on wall nodes over all Poisson solves.
    pub boundary_error: f64,
}

/// Trains the experiment's network with `seed`.
pub fn train(exp: &Experiment, seed: u64) -> Result<TrainedNet> {
    let mut lm = exp.lm.clone();
    lm.seed = seed;
    let t = Instant::now();
    let (mut net, report) = match &exp.kind {
        ExperimentKind::Poisson(p) => {
            hybrid::train(p, &hybrid::NetConfig { width: exp.width, samples: exp.samples, lm })?
        }
        ExperimentKind::Stokes(p) => stokes::train_stokes(p, exp.width, exp.samples, &lm)?,
    };
    net.set_seed(seed);
    Ok(TrainedNet { net, report, seconds: t.elapsed().as_secs_f64() })
}

/// Seed used for grid `i` of the sweep. Retraining varies it so the rows
/// measure sensitivity to the net.
fn grid_seed(exp: &Experiment, i: usize) -> u64 {
    if exp.retrain {
        exp.lm.seed.wrapping_add(i as u64)
    } else {
        exp.lm.seed
    }
}

/// Trains once (or per grid with `retrain`) and sweeps the grids.
pub fn run(exp: &Experiment) -> Result<RunOutput> {
    match &exp.kind {
        ExperimentKind::Poisson(p) => run_poisson(exp, p),
        ExperimentKind::Stokes(p) => run_stokes(exp, p),
    }
}

fn nets_for(exp: &Experiment, count: usize) -> Result<Vec<(usize, TrainedNet)>> {
    let mut nets = vec![];
    for (i, &n) in exp.grids.iter().enumerate().take(count) {
        if i == 0 || exp.retrain {
            nets.push((n, train(exp, grid_seed(exp, i))?));
        }
    }
    Ok(nets)
}

fn net_for(nets: &[(usize, TrainedNet)], i: usize) -> &TrainedNet {
    &nets[i.min(nets.len() - 1)].1
}

fn boundary_error(sol: &HybridSolution, p: &PoissonInterfaceProblem) -> f64 {
    let spec = sol.spec();
    let mut m = 0.0f64;
    spec.for_each_point(|flat, idx, x| {
        if spec.is_boundary(idx) {
            m = m.max((sol.u.values()[flat] - (p.u_b)(x)).abs());
        }
    });
    m
}

fn row(n: usize, h: f64, errors: Vec<f64>, tn: &TrainedNet, solve_seconds: f64) -> Row {
    Row {
        n,
        h,
        errors,
        orders: vec![],
        train_loss: tn.report.final_loss,
        train_epochs: tn.report.epochs_used,
        converged: tn.report.converged,
        train_seconds: tn.seconds,
        solve_seconds,
    }
}

fn run_poisson(exp: &Experiment, p: &PoissonInterfaceProblem) -> Result<RunOutput> {
    let nets = nets_for(exp, exp.grids.len())?;
    let mut table = ConvergenceTable::new(&POISSON_QUANTITIES);
    let mut bnd = 0.0f64;
    let mut prev: Option<(HybridSolution, f64)> = None;
    for (i, &n) in exp.grids.iter().enumerate() {
        let tn = net_for(&nets, i);
        let spec = p.grid(n)?;
        let t = Instant::now();
        let sol = hybrid::solve_with_net(p, &tn.net, &tn.report, &spec)?;
        let secs = t.elapsed().as_secs_f64();
        bnd = bnd.max(boundary_error(&sol, p));
        if exp.dump_fields {
            dump_poisson(&exp.out, &sol)?;
        }
        match exp.mode {
            ErrorMode::Exact => {
                let e = hybrid::exact_errors(&sol, p)?;
                table.push(row(n, spec.h(), norms(e), tn, secs));
            }
            ErrorMode::Successive => {
                if let Some((coarse, coarse_secs)) = prev.take() {
                    let e = hybrid::successive_errors(&coarse, &sol, &p.geometry)?;
                    let cn = coarse.spec().n();
                    table.push(row(cn, coarse.spec().h(), norms(e), net_for(&nets, i - 1), coarse_secs));
                }
                prev = Some((sol, secs));
            }
        }
    }
    Ok(RunOutput { table, nets, boundary_error: bnd })
}

fn norms(e: ErrorNorms) -> Vec<f64> {
    vec![e.u, e.grad]
}

fn run_stokes(exp: &Experiment, p: &StokesProblem) -> Result<RunOutput> {
    let nets = nets_for(exp, exp.grids.len())?;
    let mut table = ConvergenceTable::new(&STOKES_QUANTITIES);
    for (i, &n) in exp.grids.iter().enumerate() {
        let tn = net_for(&nets, i);
        let t = Instant::now();
        let sol = stokes::solve_stokes_with_net(p, n, &tn.net, &tn.report)?;
        let secs = t.elapsed().as_secs_f64();
        if exp.dump_fields {
            dump_stokes(&exp.out, &sol)?;
        }
        let e = stokes::stokes_errors(&sol, p)?;
        table.push(row(n, sol.layout.h(), e.as_array().to_vec(), tn, secs));
    }
    Ok(RunOutput { table, nets, boundary_error: 0.0 })
}

/// Writes `table.csv`, `timings.csv` and the nets with their loss
/// histories (`net.txt`/`loss.csv`, or `net_n{N}.txt`/`loss_n{N}.csv` per
/// grid with `retrain`).
pub fn write_artifacts(exp: &Experiment, out: &RunOutput) -> Result<()> {
    fs::create_dir_all(&exp.out).with_context(|| format!("creating {}", exp.out.display()))?;
    write(&exp.out.join("table.csv"), &out.table.to_csv())?;
    write(&exp.out.join("timings.csv"), &out.table.timings_csv())?;
    for (n, tn) in &out.nets {
        let suffix = if exp.retrain { format!("_n{n}") } else { String::new() };
        save_net(&exp.out, &suffix, tn)?;
    }
    Ok(())
}

pub fn save_net(dir: &Path, suffix: &str, tn: &TrainedNet) -> Result<()> {
    fs::create_dir_all(dir)?;
    tn.net.save(dir.join(format!("net{suffix}.txt")))?;
    write(&dir.join(format!("loss{suffix}.csv")), &tn.report.to_csv())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn dump_fields(path: &Path, columns: &[&str], fields: &[&GridField]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    let spec = fields[0].spec();
    let axes = ["x", "y", "z"];
    let header: Vec<&str> = axes[..spec.dim()].iter().chain(columns).copied().collect();
    writeln!(w, "{}", header.join(","))?;
    let mut err = Ok(());
    spec.for_each_point(|flat, _, x| {
        if err.is_err() {
            return;
        }
        let vals: Vec<String> = x
            .iter()
            .copied()
            .chain(fields.iter().map(|f| f.values()[flat]))
            .map(format_e16)
            .collect();
        err = writeln!(w, "{}", vals.join(","));
    });
    err?;
    w.flush()?;
    Ok(())
}

/// `fields/poisson_n{N}.csv` with `u`, `v`, `w` per node.
pub fn dump_poisson(dir: &Path, sol: &HybridSolution) -> Result<()> {
    let path = dir.join("fields").join(format!("poisson_n{}.csv", sol.spec().n()));
    dump_fields(&path, &["u", "v", "w"], &[&sol.u, &sol.v, &sol.w])
}

/// `fields/stokes_{p,u1,u2}_n{N}.csv`, each on its own staggered grid.
pub fn dump_stokes(dir: &Path, sol: &StokesSolution) -> Result<()> {
    let n = sol.layout.n();
    let fdir = dir.join("fields");
    let pr = &sol.pressure;
    dump_fields(&fdir.join(format!("stokes_p_n{n}.csv")), &["p", "v", "w"], &[&pr.p, &pr.v, &pr.w])?;
    for (c, name) in ["u1", "u2"].iter().enumerate() {
        let vc = &sol.velocity[c];
        dump_fields(&fdir.join(format!("stokes_{name}_n{n}.csv")), &[name, "v", "w"], &[&vc.u, &vc.v, &vc.w])?;
    }
    Ok(())
}

/// One solve on an `n`-grid with a given net. Returns the max-norm errors when
/// the problem has a closed form.
pub fn solve_once(exp: &Experiment, tn: &TrainedNet, n: usize) -> Result<Option<Vec<f64>>> {
    match &exp.kind {
        ExperimentKind::Poisson(p) => {
            let sol = hybrid::solve_with_net(p, &tn.net, &tn.report, &p.grid(n)?)?;
            dump_poisson(&exp.out, &sol)?;
            Ok(p.exact.as_ref().map(|_| hybrid::exact_errors(&sol, p)).transpose()?.map(norms))
        }
        ExperimentKind::Stokes(p) => {
            let sol = stokes::solve_stokes_with_net(p, n, &tn.net, &tn.report)?;
            dump_stokes(&exp.out, &sol)?;
            Ok(Some(stokes::stokes_errors(&sol, p)?.as_array().to_vec()))
        }
    }
}
