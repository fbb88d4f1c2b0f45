//! Text formats: one-column data files and threshold grid specs.
//!
//! Data files hold one number per line (decimal or scientific notation),
//! LF or CRLF line endings, and at most one header line, which must be the
//! first line. Blank lines are skipped. Every value must be finite and at
//! least one value must be present.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{Provenance, Sample};

/// Parses the contents of a data file. `negate` flips the sign of every
/// value so that left tails can be treated as right tails.
pub fn parse_data(bytes: &[u8], negate: bool) -> Result<Vec<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "input is not valid UTF-8".into(),
    })?;
    let mut values = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(if negate { -v } else { v }),
            Ok(v) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("value {v} is not finite"),
                })
            }
            Err(_) if idx == 0 && is_header(line) => continue,
            Err(_) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("{line:?} is not a number"),
                })
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data values".into(),
        });
    }
    Ok(values)
}

fn is_header(line: &str) -> bool {
    // a header is a single non-numeric token such as `value` or `revenue`
    !line.contains(',') && line.chars().any(|c| c.is_ascii_alphabetic())
}

/// Reads a data file into a sorted sample.
pub fn read_sample(path: &Path, negate: bool) -> Result<Sample> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Io(format!("file not found: {}", path.display())),
        _ => Error::Io(format!("{}: {e}", path.display())),
    })?;
    let values = parse_data(&bytes, negate)?;
    Sample::new(values, Provenance::File(path.display().to_string()))
}

/// Parses a grid spec: either a comma-separated list (`1,2.5,4`) or
/// `lo:hi:steps`, which expands to `steps` evenly spaced points from `lo`
/// to `hi` inclusive. The result is validated to be finite and sorted.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("grid value {s:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Argument(format!("grid value {s:?} is not finite")))
        }
    };
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Argument(format!("grid {spec:?}: expected lo:hi:steps")));
        }
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let steps: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("grid steps {:?} is not a count", parts[2])))?;
        if steps == 0 || steps > 100_000 {
            return Err(Error::Argument(format!("grid steps {steps} outside [1, 100000]")));
        }
        if steps == 1 {
            if lo != hi {
                return Err(Error::Argument("a 1-step grid needs lo == hi".into()));
            }
            vec![lo]
        } else {
            let h = (hi - lo) / (steps - 1) as f64;
            (0..steps)
                .map(|i| if i == steps - 1 { hi } else { lo + i as f64 * h })
                .collect()
        }
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() {
        return Err(Error::Argument("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument(format!("grid {spec:?} is not sorted")));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_crlf_and_scientific() {
        let v = parse_data(b"revenue\r\n1.5\r\n2e3\r\n-4.25E-1\r\n", false).unwrap();
        assert_eq!(v, vec![1.5, 2000.0, -0.425]);
        let v = parse_data(b"1\n2\n\n3", true).unwrap();
        assert_eq!(v, vec![-1.0, -2.0, -3.0]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_data(b"", false).is_err());
        assert!(parse_data(b"value\n", false).is_err());
        assert!(matches!(
            parse_data(b"1\nabc\n", false),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_data(b"1\ninf\n", false).is_err());
        assert!(parse_data(b"1\nNaN\n", false).is_err());
        assert!(parse_data(b"h1\nh2\n1\n", false).is_err());
        assert!(parse_data(&[0xff, 0xfe], false).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("3:3:1").unwrap(), vec![3.0]);
        assert_eq!(parse_grid("7").unwrap(), vec![7.0]);
        for bad in ["", "1,,2", "3,1", "0:1", "0:1:0", "1:0:3", "a:b:c", "0:1:x", "1,inf"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
