//! One function per subcommand, all funneling through [`run`].

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::{json, Value};

use symdisc::baselines;
use symdisc::cgu::{self, SymmetryPattern};
use symdisc::coherent::{gram, Codebook};
use symdisc::gu;
use symdisc::symmetry::{
    characters::double_coset_char_sum_complex, characters_from_rep, classify, double_cosets,
    orbits, Classification, PermutationGroup, RepresentationData,
};
use symdisc::ykl::{self, MeasurementSolution};
use symdisc::{C64, ComplexMatrix};

use crate::output::{emit, fmt_c, fmt_f};
use crate::source::{self, GroupSpec, Source};
use crate::{Command, Failure, Family, MatrixFormat, Method, OutputArgs, RunConfig};

/// Imaginary parts below this print as real numbers in CSV tables.
const REAL_TABLE_TOL: f64 = 1e-12;

pub fn run(cfg: RunConfig) -> Result<(), Failure> {
    match cfg.command {
        Command::Gram { source, format, out } => cmd_gram(&source::load(&source)?, format, &out),
        Command::Classify { source, group, tol, out } => {
            cmd_classify(&source::load(&source)?, &group, tol, &out)
        }
        Command::Solve { source, method, group, tol, out } => {
            cmd_solve(&source::load(&source)?, method, &group, tol, &out)
        }
        Command::Verify { source, solution, tol, out } => {
            cmd_verify(&source::load(&source)?, &solution, tol, &out)
        }
        Command::Characters { group, cosets, out } => cmd_characters(&group, cosets, &out),
        Command::Sweep { constellation, n, receivers, nbar_grid, jobs, out } => {
            cmd_sweep(constellation, n, receivers.as_deref(), &nbar_grid, jobs, &out)
        }
        Command::Fig1 { out } => cmd_fig1(&out),
    }
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Run(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn cmd_gram(src: &Source, format: MatrixFormat, out: &OutputArgs) -> Result<(), Failure> {
    let g = gram(&src.codebook);
    let text = match format {
        MatrixFormat::Json => to_pretty(&g)?,
        MatrixFormat::Csv => {
            let n = g.dim();
            let mut s = String::new();
            for i in 0..n {
                let cells: Vec<String> = (0..n)
                    .flat_map(|j| [fmt_f(g[(i, j)].re), fmt_f(g[(i, j)].im)])
                    .collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(out.output.as_deref(), &text)
}

#[derive(Serialize)]
struct ClassifyOutput {
    group_order: usize,
    orbit_count: usize,
    orbit_sizes: Vec<usize>,
    classification: Classification,
}

fn cmd_classify(src: &Source, group: &str, tol: f64, out: &OutputArgs) -> Result<(), Failure> {
    let spec = source::parse_group(group)?;
    let group = source::resolve_group(&spec, src, tol)?;
    let cls = classify(&gram(&src.codebook), &group, tol)
        .map_err(|e| Failure::Config(format!("classification: {e}")))?;
    let dec = orbits(&group);
    let report = ClassifyOutput {
        group_order: group.order(),
        orbit_count: dec.count(),
        orbit_sizes: dec.sizes(),
        classification: cls,
    };
    emit(out.output.as_deref(), &to_pretty(&report)?)
}

type Solved = (&'static str, MeasurementSolution, Vec<(&'static str, Value)>);

fn cmd_solve(
    src: &Source,
    method: Method,
    group: &str,
    tol: f64,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let cb = &src.codebook;
    let spec = source::parse_group(group)?;
    let (label, sol, extras) = match method {
        Method::Pgm => solve_pgm(cb)?,
        Method::Gu => solve_gu(cb, &source::resolve_group(&spec, src, tol)?, tol)?,
        Method::Cgu => solve_cgu(cb, &source::resolve_group(&spec, src, tol)?)?,
        Method::Reduced => solve_reduced(cb, &source::resolve_group(&spec, src, tol)?)?,
        Method::Auto => solve_auto(cb, &source::resolve_group(&spec, src, tol)?, tol)?,
    };

    let mut v = serde_json::to_value(&sol).expect("solution serializes");
    let obj = v.as_object_mut().expect("solution is a JSON object");
    obj.insert("method".into(), json!(label));
    obj.insert("p_s".into(), json!(1.0 - sol.error_probability()));
    for (k, val) in extras {
        obj.insert(k.into(), val);
    }
    emit(out.output.as_deref(), &to_pretty(&v)?)
}

/// Classify, then dispatch the way the structure suggests: single orbit to
/// the closed form when the representation is supported, several free
/// orbits to the block solver, anything else to the PGM.
fn solve_auto(cb: &Codebook, group: &PermutationGroup, tol: f64) -> Result<Solved, Failure> {
    let cls = classify(&gram(cb), group, tol)
        .map_err(|e| Failure::Config(format!("classification: {e}")))?;
    match cls {
        Classification::Gu { .. }
            if cb.has_equal_priors() && characters_from_rep(group).is_ok() =>
        {
            solve_gu(cb, group, tol)
        }
        Classification::Gu { .. } => {
            log::info!("single orbit but no closed form here; using the pretty good measurement");
            solve_pgm(cb)
        }
        Classification::Cgu { .. } => solve_cgu(cb, group),
        Classification::Asymmetric { .. } => {
            log::info!("no transitive structure; using the pretty good measurement");
            solve_pgm(cb)
        }
    }
}

fn solve_pgm(cb: &Codebook) -> Result<Solved, Failure> {
    let sol = gu::pgm(cb).map_err(|e| Failure::Run(format!("pretty good measurement: {e}")))?;
    Ok(("pgm", sol, Vec::new()))
}

fn solve_gu(cb: &Codebook, group: &PermutationGroup, tol: f64) -> Result<Solved, Failure> {
    if !cb.has_equal_priors() {
        return Err(Failure::Config("the GU closed form assumes equal priors".into()));
    }
    let cls = classify(&gram(cb), group, tol)
        .map_err(|e| Failure::Config(format!("classification: {e}")))?;
    if !matches!(cls, Classification::Gu { .. }) {
        return Err(Failure::Config(format!(
            "--method gu needs a single group orbit, classification reported {cls:?}"
        )));
    }
    let rep =
        characters_from_rep(group).map_err(|e| Failure::Run(format!("representation: {e}")))?;
    let s = ykl::state_coordinates(cb)
        .map_err(|e| Failure::Run(format!("state coordinates: {e}")))?;
    let n = cb.len();
    let psi: Vec<C64> = (0..n).map(|k| s[(k, 0)]).collect();
    let overlaps =
        gu::isotypic_overlaps(&psi, &rep).map_err(|e| Failure::Run(format!("overlaps: {e}")))?;
    let p_s = gu::gu_success_probability(&overlaps, n);
    let w0 = gu::gu_optimal_vector(&psi, &rep)
        .map_err(|e| Failure::Run(format!("optimal vector: {e}")))?;

    // the full basis is the orbit of the seed vector under the action
    let mut w = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let gi = group
            .elements()
            .iter()
            .find(|e| e.apply(0) == i)
            .expect("transitive action reaches every index");
        for (k, &v) in w0.iter().enumerate() {
            w[(gi.apply(k), i)] = v;
        }
    }
    let sol = MeasurementSolution::from_measurement(cb, w)
        .map_err(|e| Failure::Run(format!("assembling the measurement: {e}")))?;
    let dev = (1.0 - sol.error_probability() - p_s).abs();
    if dev > 1e-8 {
        log::warn!("closed-form and assembled success probabilities differ by {dev:.3e}");
    }
    let extras = vec![
        ("p_s_closed_form", json!(p_s)),
        (
            "isotypic_overlaps",
            json!({
                "labels": overlaps.labels(),
                "dims": overlaps.dims(),
                "overlaps": overlaps.overlaps(),
            }),
        ),
    ];
    Ok(("gu", sol, extras))
}

fn solve_cgu(cb: &Codebook, group: &PermutationGroup) -> Result<Solved, Failure> {
    let bs = cgu::block_reduce(cb, group).map_err(|e| match e {
        symdisc::Error::GramNotInvariant | symdisc::Error::DimensionMismatch(_) => {
            Failure::Config(format!("block reduction: {e}"))
        }
        other => Failure::Run(format!("block reduction: {other}")),
    })?;
    let (sol, diag) = cgu::solve_blocks_ykl_detailed(&bs, cb.priors())
        .map_err(|e| Failure::Run(format!("block solver: {e}")))?;
    let diag = serde_json::to_value(&diag).expect("diagnostics serialize");
    Ok(("cgu", sol, vec![("diagnostics", diag)]))
}

fn solve_reduced(cb: &Codebook, group: &PermutationGroup) -> Result<Solved, Failure> {
    if !cb.has_equal_priors() {
        return Err(Failure::Config("the entrywise solver assumes equal priors".into()));
    }
    let pattern = SymmetryPattern::from_group(group);
    let red = cgu::symmetry_reduced_solve(&gram(cb), &pattern, cb.priors(), None).map_err(
        |e| match e {
            symdisc::Error::InvalidParameter(_)
            | symdisc::Error::DimensionMismatch(_)
            | symdisc::Error::UnequalPriors => Failure::Config(format!("entrywise solver: {e}")),
            other => Failure::Run(format!("entrywise solver: {other}")),
        },
    )?;
    let extras = vec![
        ("class_values", json!(red.class_values)),
        ("row_distinct", json!(red.row_distinct)),
        ("iterations", json!(red.iterations)),
        ("residual", json!(red.residual)),
    ];
    Ok(("reduced", red.solution, extras))
}

fn cmd_verify(
    src: &Source,
    solution: &std::path::Path,
    tol: f64,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let text = fs::read_to_string(solution)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", solution.display())))?;
    let sol = MeasurementSolution::from_json(&src.codebook, &text)
        .map_err(|e| Failure::Config(format!("{}: {e}", solution.display())))?;
    let report = ykl::verify(&src.codebook, &sol, tol)
        .map_err(|e| Failure::Run(format!("verification: {e}")))?;
    emit(out.output.as_deref(), &to_pretty(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Run(format!(
            "conditions not satisfied at tolerance {:.1e}: eq1 residual {:.3e}, eq2 residual \
             {:.3e}, inequality min eigenvalue {:.3e}",
            report.tol, report.eq1_residual, report.eq2_residual, report.ineq_min_eig
        )))
    }
}

fn cmd_characters(group: &str, cosets: bool, out: &OutputArgs) -> Result<(), Failure> {
    let spec = source::parse_group(group)?;
    if spec == GroupSpec::Auto {
        return Err(Failure::Config(
            "characters needs an explicit group spec (cyclic:N, two-orbit-cyclic:N, sn-pairs:N)"
                .into(),
        ));
    }
    let group = source::build_group(&spec)?;
    let rep =
        characters_from_rep(&group).map_err(|e| Failure::Run(format!("representation: {e}")))?;
    let text = if cosets { coset_table(&group, &rep)? } else { character_table(&group, &rep) };
    emit(out.output.as_deref(), &text)
}

fn image_string(p: &symdisc::symmetry::Permutation) -> String {
    (0..p.degree()).map(|i| p.apply(i).to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_maybe_real(z: C64, table_is_real: bool) -> String {
    if table_is_real {
        fmt_f(z.re)
    } else {
        fmt_c(z)
    }
}

/// One row per group element: index, image, then one column per irrep.
fn character_table(group: &PermutationGroup, rep: &RepresentationData) -> String {
    let real = (0..rep.irrep_count())
        .all(|k| rep.char_values(k).iter().all(|z| z.im.abs() < REAL_TABLE_TOL));
    let mut s = String::from("element,image");
    for label in rep.labels() {
        s.push(',');
        s.push_str(label);
    }
    s.push('\n');
    for (e, elem) in group.elements().iter().enumerate() {
        s.push_str(&e.to_string());
        s.push(',');
        s.push_str(&image_string(elem));
        for k in 0..rep.irrep_count() {
            s.push(',');
            s.push_str(&fmt_maybe_real(rep.char_value(k, e), real));
        }
        s.push('\n');
    }
    s
}

/// Per-|G0| character sums over double cosets of the stabilizer of point 0.
fn coset_table(group: &PermutationGroup, rep: &RepresentationData) -> Result<String, Failure> {
    let g0 = group.point_stabilizer(0);
    let cosets = double_cosets(group, &g0)
        .map_err(|e| Failure::Run(format!("double cosets: {e}")))?;
    let sums: Vec<Vec<C64>> = (0..rep.irrep_count())
        .map(|k| {
            cosets.iter().map(|c| double_coset_char_sum_complex(rep, k, c, &g0)).collect()
        })
        .collect();
    let real = sums.iter().flatten().all(|z| z.im.abs() < REAL_TABLE_TOL);
    let mut s = String::from("irrep,coset,size,representative,sum\n");
    for (k, row) in sums.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                rep.label(k),
                c,
                cosets[c].len(),
                image_string(cosets[c].representative()),
                fmt_maybe_real(*z, real)
            ));
        }
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Receiver {
    Mpe,
    Pnr,
    Hom,
    Structured,
}

impl Receiver {
    fn name(self) -> &'static str {
        match self {
            Receiver::Mpe => "mpe",
            Receiver::Pnr => "pnr",
            Receiver::Hom => "hom",
            Receiver::Structured => "structured",
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token {
            "mpe" => Some(Receiver::Mpe),
            "pnr" => Some(Receiver::Pnr),
            "hom" => Some(Receiver::Hom),
            "structured" => Some(Receiver::Structured),
            _ => None,
        }
    }
}

fn allowed_receivers(family: Family) -> &'static [Receiver] {
    match family {
        Family::Ppm | Family::Ppm2 => &[Receiver::Mpe, Receiver::Pnr],
        Family::Pcppm => &[Receiver::Mpe, Receiver::Hom, Receiver::Structured],
    }
}

/// Error probability of one receiver at one grid point.
fn receiver_pe(family: Family, rx: Receiver, n: usize, nbar: f64) -> symdisc::Result<f64> {
    match (family, rx) {
        (Family::Ppm, Receiver::Mpe) => gu::ppm_mpe_pe(n, nbar),
        (Family::Ppm, Receiver::Pnr) => baselines::ppm_pnr_pe(n, nbar),
        (Family::Ppm2, Receiver::Mpe) => gu::two_pulse_ppm_mpe_ps(n, nbar).map(|p| 1.0 - p),
        (Family::Ppm2, Receiver::Pnr) => baselines::two_pulse_pnr_ps(n, nbar).map(|p| 1.0 - p),
        (Family::Pcppm, Receiver::Mpe) => {
            if nbar == 0.0 {
                // all 2N codewords coincide: blind guessing
                Ok(1.0 - 1.0 / (2.0 * n as f64))
            } else {
                let alpha = C64::new(nbar.sqrt(), 0.0);
                cgu::pcppm_mpe_ps(n, alpha, -alpha).map(|p| 1.0 - p)
            }
        }
        (Family::Pcppm, Receiver::Hom) => baselines::pcppm_homodyne_ps(n, nbar).map(|p| 1.0 - p),
        (Family::Pcppm, Receiver::Structured) => baselines::pcppm_structured_pe(n, nbar),
        _ => unreachable!("receiver list validated against the family"),
    }
}

fn cmd_sweep(
    family: Family,
    n: usize,
    receivers: Option<&str>,
    grid_spec: &str,
    jobs: Option<usize>,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let grid = source::parse_grid(grid_spec)?;
    let rx: Vec<Receiver> = match receivers {
        None => allowed_receivers(family).to_vec(),
        Some(list) => list
            .split(',')
            .map(|token| {
                let token = token.trim();
                let r = Receiver::parse(token).ok_or_else(|| {
                    Failure::Config(format!("unknown receiver '{token}'"))
                })?;
                if !allowed_receivers(family).contains(&r) {
                    let names: Vec<_> =
                        allowed_receivers(family).iter().map(|r| r.name()).collect();
                    return Err(Failure::Config(format!(
                        "receiver '{token}' is not available for {family}; choose from {}",
                        names.join(",")
                    )));
                }
                Ok(r)
            })
            .collect::<Result<_, _>>()?,
    };
    if rx.is_empty() {
        return Err(Failure::Config("empty receiver list".into()));
    }
    source::build_constellation(family, n, 1.0)
        .map_err(|e| Failure::Config(format!("cannot build {family}:{n}: {e}")))?;

    let jobs = jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()))
        .clamp(1, grid.len());
    log::debug!("sweeping {} grid points on {jobs} threads", grid.len());

    let slots: Vec<Mutex<Option<Result<Vec<f64>, String>>>> =
        grid.iter().map(|_| Mutex::new(None)).collect();
    let counter = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = counter.fetch_add(1, Ordering::Relaxed);
                if idx >= grid.len() {
                    break;
                }
                let nbar = grid[idx];
                let row: Result<Vec<f64>, String> = rx
                    .iter()
                    .map(|r| {
                        receiver_pe(family, *r, n, nbar)
                            .map_err(|e| format!("{} at nbar {nbar}: {e}", r.name()))
                    })
                    .collect();
                *slots[idx].lock().expect("sweep worker poisoned a slot") = Some(row);
            });
        }
    });

    let mut text = String::from("nbar");
    for r in &rx {
        text.push(',');
        text.push_str(r.name());
    }
    text.push('\n');
    for (slot, nbar) in slots.iter().zip(&grid) {
        let row = slot
            .lock()
            .expect("sweep worker poisoned a slot")
            .take()
            .expect("every grid point computed")
            .map_err(Failure::Run)?;
        text.push_str(&fmt_f(*nbar));
        for v in row {
            text.push(',');
            text.push_str(&fmt_f(v));
        }
        text.push('\n');
    }
    emit(out.output.as_deref(), &text)
}

fn cmd_fig1(out: &OutputArgs) -> Result<(), Failure> {
    let hit = cgu::find_fig1_subcode()
        .map_err(|e| Failure::Run(format!("subcode search: {e}")))?;
    emit(out.output.as_deref(), &to_pretty(&hit)?)
}
