//! Range arguments: a single value, `start:stop:step`, `log:start:stop:count`
//! or a comma-separated list of any of these.

use gcmc_core::monotonicity::{lin_space, log_space};

pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        out.extend(parse_part(part)?);
    }
    if out.is_empty() {
        return Err(format!("empty range `{text}`"));
    }
    Ok(out)
}

fn number(s: &str, whole: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` in range `{whole}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("range `{whole}` contains a non-finite value"));
    }
    Ok(v)
}

fn parse_part(part: &str) -> Result<Vec<f64>, String> {
    let fields: Vec<&str> = part.split(':').collect();
    match fields.as_slice() {
        [v] => Ok(vec![number(v, part)?]),
        ["log", start, stop, count] => {
            let (a, b) = (number(start, part)?, number(stop, part)?);
            let n: usize = count.trim().parse().map_err(|_| format!("count in `{part}` must be a positive integer"))?;
            if n == 0 || !(a > 0.0 && b > 0.0) {
                return Err(format!("log range `{part}` needs positive endpoints and count"));
            }
            Ok(log_space(a, b, n))
        }
        [start, stop, step] => {
            let (a, b, h) = (number(start, part)?, number(stop, part)?, number(step, part)?);
            if !(h > 0.0) || b < a {
                return Err(format!("range `{part}` needs start <= stop and a positive step"));
            }
            if (b - a) / h > 1e7 {
                return Err(format!("range `{part}` has too many points"));
            }
            Ok(lin_space(a, b, h))
        }
        _ => Err(format!("cannot parse range `{part}`; expected v, start:stop:step or log:start:stop:count")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_range("0.5").unwrap(), [0.5]);
        assert_eq!(parse_range("1:3:1").unwrap(), [1.0, 2.0, 3.0]);
        assert_eq!(parse_range("0.05:0.5:0.05").unwrap().len(), 10);
        let l = parse_range("log:0.01:10:40").unwrap();
        assert_eq!(l.len(), 40);
        assert!((l[39] - 10.0).abs() < 1e-12);
        assert_eq!(parse_range("1, 2:3:1").unwrap(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects() {
        for bad in ["", "a", "1:0:1", "0:1:0", "log:0:1:3", "log:1:2:x", "1:2", "nan"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
