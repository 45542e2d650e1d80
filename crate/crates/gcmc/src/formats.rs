//! Text formats.
//!
//! * mixtures: one component per line, `weight mean variance`;
//! * grids: two-column CSV `y,f` on a uniform grid, header optional;
//! * graphs: vertex count on the first line, then one `u v` edge per line;
//! * certificates: `builtin:<name>` or a path to the certificate text format.
//!
//! In every format `#` starts a comment and blank lines are ignored.

use std::fs;
use std::path::Path;

use gcmc_core::certificates::{builtin, parse_certificate, SosCertificate, BUILTIN_NAMES};
use gcmc_core::densities::{Density, DensityGrid, GaussianMixture};
use gcmc_core::sequences::Graph;

use crate::error::CliError;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn field<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T, CliError> {
    s.parse().map_err(|_| CliError::Validation(format!("line {line}: `{s}` is not a valid {what}")))
}

pub fn parse_mixture(text: &str) -> Result<GaussianMixture, CliError> {
    let mut triples = Vec::new();
    for (line, l) in content_lines(text) {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CliError::Validation(format!("line {line}: expected `weight mean variance`")));
        }
        triples.push((
            field::<f64>(parts[0], "weight", line)?,
            field::<f64>(parts[1], "mean", line)?,
            field::<f64>(parts[2], "variance", line)?,
        ));
    }
    Ok(GaussianMixture::from_triples(&triples)?)
}

pub fn format_mixture(m: &GaussianMixture) -> String {
    let mut out = String::from("# weight mean variance\n");
    for c in m.components() {
        out.push_str(&format!("{} {} {}\n", c.weight, c.mean, c.variance));
    }
    out
}

/// Relative spacing deviation tolerated in grid files.
const GRID_SPACING_TOLERANCE: f64 = 1e-6;

pub fn parse_grid(text: &str) -> Result<DensityGrid, CliError> {
    let mut ys = Vec::new();
    let mut fs = Vec::new();
    for (line, l) in content_lines(text) {
        let parts: Vec<&str> = l.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(CliError::Validation(format!("line {line}: expected `y,f`")));
        }
        if ys.is_empty() && fs.is_empty() && parts[0].parse::<f64>().is_err() {
            // Header row.
            continue;
        }
        ys.push(field::<f64>(parts[0], "abscissa", line)?);
        fs.push(field::<f64>(parts[1], "density value", line)?);
    }
    if ys.len() < 2 {
        return Err(CliError::Validation("grid needs at least two samples".into()));
    }
    let spacing = (ys[ys.len() - 1] - ys[0]) / (ys.len() - 1) as f64;
    for (i, w) in ys.windows(2).enumerate() {
        if ((w[1] - w[0]) - spacing).abs() > GRID_SPACING_TOLERANCE * spacing.abs() {
            return Err(CliError::Validation(format!("grid abscissae are not uniform near row {}", i + 2)));
        }
    }
    Ok(DensityGrid::new(ys[0], spacing, fs)?)
}

pub fn format_grid(g: &DensityGrid) -> String {
    let mut out = String::from("y,f\n");
    for (i, f) in g.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", g.y(i), f));
    }
    out
}

/// A density file: grids by `.csv` extension, mixtures otherwise.
pub fn load_density(path: &Path) -> Result<Density, CliError> {
    let text = read(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        Ok(Density::Grid(parse_grid(&text)?))
    } else {
        Ok(Density::Mixture(parse_mixture(&text)?))
    }
}

pub fn load_mixture(path: &Path) -> Result<GaussianMixture, CliError> {
    parse_mixture(&read(path)?)
}

pub fn parse_graph(text: &str) -> Result<Graph, CliError> {
    let mut lines = content_lines(text);
    let (line, first) = lines.next().ok_or_else(|| CliError::Validation("graph file is empty".into()))?;
    let n: usize = field(first, "vertex count", line)?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(CliError::Validation(format!("line {line}: expected `u v`")));
        }
        edges.push((field::<usize>(parts[0], "vertex", line)?, field::<usize>(parts[1], "vertex", line)?));
    }
    Ok(Graph::with_edges(n, &edges)?)
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("{}\n", g.vertex_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    parse_graph(&read(path)?)
}

pub fn load_certificate(source: &str) -> Result<SosCertificate, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin(name).ok_or_else(|| {
            CliError::Validation(format!("unknown built-in certificate `{name}`; known: {}", BUILTIN_NAMES.join(", ")))
        });
    }
    Ok(parse_certificate(&read(Path::new(source))?)?)
}

/// Comma- or whitespace-separated numbers.
pub fn parse_values(text: &str) -> Result<Vec<String>, CliError> {
    let values: Vec<String> = content_lines(text)
        .flat_map(|(_, l)| l.split(|c: char| c == ',' || c.is_whitespace()).map(str::to_owned).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    if values.is_empty() {
        return Err(CliError::Validation("no sequence values given".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_round_trip() {
        let m = parse_mixture("# comment\n0.25 0 1\n\n0.75 3.5 2 # tail\n").unwrap();
        assert_eq!(m.components().len(), 2);
        assert_eq!(parse_mixture(&format_mixture(&m)).unwrap(), m);
        assert!(parse_mixture("1 0").is_err());
        assert!(parse_mixture("1 0 -1").is_err());
        assert!(parse_mixture("").is_err());
    }

    #[test]
    fn grid_round_trip() {
        let g = parse_grid("y,f\n0,0\n0.5,1\n1,1\n1.5,0\n").unwrap();
        assert_eq!(g.len(), 4);
        let again = parse_grid(&format_grid(&g)).unwrap();
        assert!((again.spacing() - g.spacing()).abs() < 1e-15);
        assert!(parse_grid("0,1\n0.5,1\n2,1\n").is_err());
        assert!(parse_grid("0,1\n").is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = parse_graph("3\n0 1\n1 2\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
        assert!(parse_graph("2\n0 0\n").is_err());
        assert!(parse_graph("2\n0 5\n").is_err());
        assert!(parse_graph("").is_err());
    }

    #[test]
    fn certificate_sources() {
        assert_eq!(load_certificate("builtin:paper-n3").unwrap().order, 3);
        assert!(load_certificate("builtin:nope").is_err());
        assert!(load_certificate("/nonexistent/cert.txt").is_err());
    }
}
