//! Plain-text p-value and weight files: one value per line, blank lines and
//! `#` comments skipped, fields split on tabs, commas or spaces.

use std::path::Path;

use crate::error::CliError;

/// Rows of a numeric text file, each with its 1-based line number.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let fields = line
            .split(|c: char| c == '\t' || c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        Some((i + 1, fields))
    })
}

fn number(path: &Path, line: usize, field: &str, what: &str) -> Result<f64, CliError> {
    field.parse::<f64>().map_err(|_| CliError::Input {
        path: path.to_path_buf(),
        line,
        message: format!("cannot read {what} `{field}`"),
    })
}

/// P-values from the first column and, when present, weights from the
/// second. The weight column must be present on every line or none.
pub fn parse_pvalues(path: &Path, text: &str) -> Result<(Vec<f64>, Option<Vec<f64>>), CliError> {
    let mut pvalues = Vec::new();
    let mut weights = Vec::new();
    let mut with_weights = None;
    for (line, fields) in rows(text) {
        let bad = |message: String| CliError::Input {
            path: path.to_path_buf(),
            line,
            message,
        };
        if fields.len() > 2 {
            return Err(bad(format!(
                "expected 1 or 2 fields, found {}",
                fields.len()
            )));
        }
        let p = number(path, line, fields[0], "p-value")?;
        if !(p > 0.0 && p <= 1.0) {
            return Err(bad(format!("p-value {p} is outside (0, 1]")));
        }
        pvalues.push(p);
        let has = fields.len() == 2;
        match with_weights {
            None => with_weights = Some(has),
            Some(prev) if prev != has => {
                return Err(bad("weight column present on some lines only".into()))
            }
            _ => {}
        }
        if has {
            weights.push(parse_weight(path, line, fields[1])?);
        }
    }
    if pvalues.is_empty() {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            line: 0,
            message: "no p-values".into(),
        });
    }
    Ok((pvalues, with_weights.unwrap_or(false).then_some(weights)))
}

/// Weights from a one-column file.
pub fn parse_weights(path: &Path, text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (line, fields) in rows(text) {
        if fields.len() != 1 {
            return Err(CliError::Input {
                path: path.to_path_buf(),
                line,
                message: format!("expected 1 field, found {}", fields.len()),
            });
        }
        out.push(parse_weight(path, line, fields[0])?);
    }
    Ok(out)
}

fn parse_weight(path: &Path, line: usize, field: &str) -> Result<f64, CliError> {
    let w = number(path, line, field, "weight")?;
    if !(w.is_finite() && w >= 0.0) {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            line,
            message: format!("weight {w} must be finite and non-negative"),
        });
    }
    Ok(w)
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("in.txt")
    }

    #[test]
    fn comments_and_blank_lines() {
        let (pv, w) = parse_pvalues(p(), "# header\n0.1\n\n  0.5 \n1\n").unwrap();
        assert_eq!(pv, vec![0.1, 0.5, 1.0]);
        assert!(w.is_none());
    }

    #[test]
    fn weight_column() {
        let (pv, w) = parse_pvalues(p(), "0.1\t2\n0.2,1\n0.3 1\n").unwrap();
        assert_eq!(pv, vec![0.1, 0.2, 0.3]);
        assert_eq!(w.unwrap(), vec![2.0, 1.0, 1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line = |text: &str| match parse_pvalues(p(), text).unwrap_err() {
            CliError::Input { line, .. } => line,
            e => panic!("{e}"),
        };
        assert_eq!(line("0.1\n# c\nabc\n"), 3);
        assert_eq!(line("0.1\n0\n"), 2);
        assert_eq!(line("0.1\n1.5\n"), 2);
        assert_eq!(line("0.1 1\n0.2\n"), 2);
        assert_eq!(line("0.1 1 2\n"), 1);
        assert_eq!(line("0.1 -1\n"), 1);
        assert_eq!(line("# only\n"), 0);
        let e = parse_weights(p(), "1\nx\n").unwrap_err();
        assert!(e.to_string().starts_with("in.txt:2:"), "{e}");
    }
}
