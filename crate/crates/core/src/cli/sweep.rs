/// Values closer than this to `stop` count as hitting it.
const STOP_TOL: f64 = 1e-12;
/// Upper bound on the number of points in one range.
const MAX_POINTS: usize = 1_000_000;

/// Parses `start:stop:step`, a single number, or a comma-separated list.
/// Ranges include `start`, and `stop` when it lies on a step point.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty sweep".into());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("range `{s}` must be start:stop:step"));
        };
        let start = number(start)?;
        let stop = number(stop)?;
        let step = number(step)?;
        if !(step > 0.0) {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("range stop {stop} is below start {start}"));
        }
        let mut out = Vec::new();
        for k in 0.. {
            let v = start + k as f64 * step;
            if v > stop + STOP_TOL {
                break;
            }
            if out.len() == MAX_POINTS {
                return Err(format!("range `{s}` has more than {MAX_POINTS} points"));
            }
            out.push(if (v - stop).abs() <= STOP_TOL { stop } else { v });
        }
        Ok(out)
    } else {
        s.split(',').map(number).collect()
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}
