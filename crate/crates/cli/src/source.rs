//! Turning flag values into library objects: codebooks, groups, grids.

use std::fs;

use symdisc::coherent::{pcppm_codebook, ppm_codebook, two_pulse_ppm_codebook, Codebook};
use symdisc::symmetry::{
    cyclic_group, gram_automorphism_group, symmetric_group_on_pairs, two_orbit_cyclic_group,
    PermutationGroup,
};
use symdisc::C64;

use crate::{Failure, Family, SourceArgs};

/// Brute-force automorphism search is capped at this many states.
const AUTO_GROUP_MAX: usize = 16;

pub struct Source {
    pub codebook: Codebook,
    /// Set when the codebook is a builtin constellation, for canonical
    /// group lookup and nicer messages.
    pub builtin: Option<(Family, usize)>,
}

pub fn load(args: &SourceArgs) -> Result<Source, Failure> {
    match (args.constellation, &args.codebook) {
        (Some(family), None) => {
            let n = args.n.expect("clap enforces --N with --constellation");
            let cb = build_constellation(family, n, args.nbar)
                .map_err(|e| Failure::Config(format!("cannot build {family}:{n}: {e}")))?;
            Ok(Source { codebook: cb, builtin: Some((family, n)) })
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let cb = Codebook::from_json(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            Ok(Source { codebook: cb, builtin: None })
        }
        (None, None) => Err(Failure::Config(
            "exactly one codebook source required: --constellation with --N, or --codebook".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with rules this out"),
    }
}

pub fn build_constellation(family: Family, n: usize, nbar: f64) -> symdisc::Result<Codebook> {
    if nbar < 0.0 || nbar.is_nan() {
        return Err(symdisc::Error::InvalidParameter(format!(
            "mean photon number {nbar} out of range"
        )));
    }
    let alpha = C64::new(nbar.sqrt(), 0.0);
    match family {
        Family::Ppm => ppm_codebook(n, alpha),
        Family::Ppm2 => two_pulse_ppm_codebook(n, alpha),
        Family::Pcppm => pcppm_codebook(n, alpha, -alpha),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Auto,
    Cyclic(usize),
    TwoOrbitCyclic(usize),
    SnPairs(usize),
}

pub fn parse_group(spec: &str) -> Result<GroupSpec, Failure> {
    if spec == "auto" {
        return Ok(GroupSpec::Auto);
    }
    let (name, arg) = spec.split_once(':').ok_or_else(|| bad_group(spec))?;
    let n: usize = arg.parse().map_err(|_| bad_group(spec))?;
    match name {
        "cyclic" => Ok(GroupSpec::Cyclic(n)),
        "two-orbit-cyclic" => Ok(GroupSpec::TwoOrbitCyclic(n)),
        "sn-pairs" => Ok(GroupSpec::SnPairs(n)),
        _ => Err(bad_group(spec)),
    }
}

fn bad_group(spec: &str) -> Failure {
    Failure::Config(format!(
        "invalid group spec '{spec}': expected cyclic:N, two-orbit-cyclic:N, sn-pairs:N or auto"
    ))
}

/// An explicit group spec to its group. `Auto` is resolved by
/// [`resolve_group`], which needs a codebook.
pub fn build_group(spec: &GroupSpec) -> Result<PermutationGroup, Failure> {
    let built = match spec {
        GroupSpec::Cyclic(n) => cyclic_group(*n),
        GroupSpec::TwoOrbitCyclic(n) => two_orbit_cyclic_group(*n),
        GroupSpec::SnPairs(n) => symmetric_group_on_pairs(*n),
        GroupSpec::Auto => unreachable!("auto spec has no standalone group"),
    };
    built.map_err(|e| Failure::Config(format!("cannot build group: {e}")))
}

/// Build the acting group. `auto` means the canonical group of a builtin
/// constellation, or the automorphism group of the Gram matrix for a JSON
/// codebook (limited to [`AUTO_GROUP_MAX`] states).
pub fn resolve_group(spec: &GroupSpec, src: &Source, tol: f64) -> Result<PermutationGroup, Failure> {
    let canonical = match spec {
        GroupSpec::Auto => match src.builtin {
            Some((Family::Ppm, n)) => GroupSpec::Cyclic(n),
            Some((Family::Ppm2, n)) => GroupSpec::SnPairs(n),
            Some((Family::Pcppm, n)) => GroupSpec::TwoOrbitCyclic(n),
            None => {
                let dim = src.codebook.len();
                if dim > AUTO_GROUP_MAX {
                    return Err(Failure::Config(format!(
                        "automorphism search handles at most {AUTO_GROUP_MAX} states, got {dim}; \
                         pass an explicit --group"
                    )));
                }
                let g = symdisc::coherent::gram(&src.codebook);
                return gram_automorphism_group(&g, tol)
                    .map_err(|e| Failure::Config(format!("cannot build group: {e}")));
            }
        },
        explicit => explicit.clone(),
    };
    build_group(&canonical)
}

/// `a:b:steps` to an inclusive linear grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || {
        Failure::Config(format!(
            "invalid grid '{spec}': expected start:stop:points with start <= stop, points >= 1"
        ))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || a > b || steps < 1 {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![a]);
    }
    Ok((0..steps)
        .map(|i| a + (b - a) * i as f64 / (steps - 1) as f64)
        .collect())
}
