//! Value lists such as `0.01,0.05` or `0.2:5.0:0.2`, or mixtures of both.

/// Longest list a single flag may expand to.
pub const MAX_GRID_LEN: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridError(pub String);

impl std::fmt::Display for GridError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(GridError(format!("'{s}' is not finite")));
    }
    Ok(v)
}

// Removes representation noise such as 0.6000000000000001.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e10).round() / 1e10;
    if r == 0.0 { 0.0 } else { r }
}

/// Parses a comma-separated list whose items are numbers or inclusive
/// ranges `start:end:step`. The end is included when the step divides the
/// span.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, GridError> {
    let mut out = Vec::new();
    if spec.trim().is_empty() {
        return Err(GridError("empty list".into()));
    }
    for item in spec.split(',') {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(number(v)?),
            [a, b, step] => {
                let (a, b, step) = (number(a)?, number(b)?, number(step)?);
                if !(step > 0.0) {
                    return Err(GridError(format!("step must be positive in '{item}'")));
                }
                if b < a {
                    return Err(GridError(format!("range end below start in '{item}'")));
                }
                let span = (b - a) / step;
                let n = (span + 1e-9).floor();
                if n + 1.0 > MAX_GRID_LEN as f64 || out.len() + n as usize + 1 > MAX_GRID_LEN {
                    return Err(GridError(format!("'{item}' expands past {MAX_GRID_LEN} values")));
                }
                for i in 0..=n as usize {
                    out.push(tidy(a + step * i as f64));
                }
            }
            _ => return Err(GridError(format!("'{item}' is neither a number nor start:end:step"))),
        }
        if out.len() > MAX_GRID_LEN {
            return Err(GridError(format!("list expands past {MAX_GRID_LEN} values")));
        }
    }
    Ok(out)
}

/// As [`parse_grid`], but every value must be a nonnegative integer.
pub fn parse_int_grid(spec: &str) -> Result<Vec<usize>, GridError> {
    parse_grid(spec)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(GridError(format!("{v} is not a nonnegative integer")))
            }
        })
        .collect()
}
