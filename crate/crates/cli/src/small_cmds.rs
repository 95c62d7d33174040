use std::path::Path;

use rflab_core::metric_spaces::{gh_optimal, BRUTE_FORCE_MAX};
use rflab_core::{soliton_gallery, FiniteMetricSpace, SolitonEntry};

use crate::artifacts::write_json;
use crate::CliError;

pub const GALLERY_FILE: &str = "gallery.json";

pub fn cmd_gallery(root: &Path) -> Result<Vec<SolitonEntry>, CliError> {
    let gallery = soliton_gallery();
    println!("{:<22} {:>3} {:>10} {:>12} {:>12} {:>12} {:>12}", "soliton", "n", "radius²", "|Rm|", "|Ric|", "R", "gap");
    for e in &gallery {
        println!(
            "{:<22} {:>3} {:>10.4} {:>12.6} {:>12.6} {:>12.6} {:>12.10}",
            e.name, e.dimension, e.radius_sq, e.curvature.rm, e.curvature.ric, e.curvature.scalar, e.gap
        );
    }
    let path = root.join(GALLERY_FILE);
    write_json(&path, &gallery)?;
    println!("written to {}", path.display());
    Ok(gallery)
}

/// Reads a distance matrix: one row per line, comma separated, no header.
/// Point 0 is the base point.
pub fn read_space(path: &Path) -> Result<FiniteMetricSpace, CliError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut dist = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        dist.push(row);
    }
    FiniteMetricSpace::new(dist, 0).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn cmd_gh(a: &Path, b: &Path, pointed: bool) -> Result<f64, CliError> {
    let x = read_space(a)?;
    let y = read_space(b)?;
    if x.len() > BRUTE_FORCE_MAX || y.len() > BRUTE_FORCE_MAX {
        return Err(CliError::Usage(format!(
            "exact GH distance is limited to {BRUTE_FORCE_MAX} points per space, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let sol = gh_optimal(&x, &y, pointed).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{}", sol.distance);
    for (i, j) in &sol.correspondence.pairs {
        println!("  {i} <-> {j}");
    }
    Ok(sol.distance)
}
