//! Plain-text point files: a `# dim=<d>` header, then one point per line as
//! `d` space-separated decimals (`x_1 .. x_{d-1} z`). `#` lines are comments.
//! Values are printed with 17 significant digits so the decimal round-trips
//! to the identical double.

use std::io::{BufRead, Write};

use hqt::Pointf;

use crate::{CliError, Result};

pub fn write_points<W: Write>(mut w: W, points: &[Pointf]) -> Result<()> {
    let d = points.first().map_or(2, |p| p.dim());
    writeln!(w, "# dim={d}")?;
    for p in points {
        let mut line = String::new();
        for &xi in p.x() {
            line.push_str(&format!("{xi:.16e} "));
        }
        line.push_str(&format!("{:.16e}", p.z()));
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_points<R: BufRead>(r: R) -> Result<Vec<Pointf>> {
    let mut dim: Option<usize> = None;
    let mut points = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("dim=") {
                let d: usize = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("line {}: bad dim header", lineno + 1)))?;
                if d < 2 {
                    return Err(CliError::Usage(format!("line {}: dim must be >= 2", lineno + 1)));
                }
                dim = Some(d);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let d = dim.ok_or_else(|| {
            CliError::Usage(format!("line {}: point before # dim=<d> header", lineno + 1))
        })?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("line {}: bad number {t:?}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != d {
            return Err(CliError::Usage(format!(
                "line {}: expected {d} fields, got {}",
                lineno + 1,
                vals.len()
            )));
        }
        let (x, z) = (vals[..d - 1].to_vec(), vals[d - 1]);
        let p = Pointf::new(x, z)
            .map_err(|e| CliError::Usage(format!("line {}: {e}", lineno + 1)))?;
        points.push(p);
    }
    if dim.is_none() {
        return Err(CliError::Usage("missing # dim=<d> header".into()));
    }
    Ok(points)
}
