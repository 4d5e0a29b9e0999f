//! Numeric flag values: a single number, a `start:step:stop` range (an
//! optional leading `:` is accepted), or a comma-separated mix of both.

use std::fmt;
use std::str::FromStr;

use crate::energy::Capacity;

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepError(String);

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for SweepError {}

fn number(s: &str) -> Result<f64, SweepError> {
    let v: f64 = s.trim().parse().map_err(|_| SweepError(format!("'{s}' is not a number")))?;
    if v.is_nan() {
        return Err(SweepError("NaN is not a valid value".into()));
    }
    Ok(v)
}

fn range(s: &str) -> Result<Vec<f64>, SweepError> {
    let body = s.strip_prefix(':').unwrap_or(s);
    let parts: Vec<&str> = body.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, step, stop] => {
            let (start, step, stop) = (number(start)?, number(step)?, number(stop)?);
            if !(step > 0.0) || !step.is_finite() {
                return Err(SweepError(format!("sweep step must be finite and > 0, got {step}")));
            }
            if stop < start {
                return Err(SweepError(format!("empty sweep: stop {stop} < start {start}")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as u64 + 1;
            if n > 1_000_000 {
                return Err(SweepError(format!("sweep has {n} points; limit is 1000000")));
            }
            Ok((0..n).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(SweepError(format!("'{s}' is neither a number nor start:step:stop"))),
    }
}

impl FromStr for Sweep {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for piece in s.split(',') {
            out.extend(range(piece.trim())?);
        }
        Ok(Sweep(out))
    }
}

impl Sweep {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Values as positive integers (antenna counts).
    pub fn counts(&self, name: &str) -> Result<Vec<u32>, SweepError> {
        self.0
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
                    Ok(v as u32)
                } else {
                    Err(SweepError(format!("{name} must be a positive integer, got {v}")))
                }
            })
            .collect()
    }
}

/// Battery capacities: integers, integer ranges and `inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySweep(pub Vec<Capacity>);

impl FromStr for CapacitySweep {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for piece in s.split(',') {
            let piece = piece.trim();
            if piece.eq_ignore_ascii_case("inf") {
                out.push(Capacity::Infinite);
                continue;
            }
            for v in range(piece)? {
                if !(v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)) {
                    return Err(SweepError(format!("battery size must be a positive integer or 'inf', got {v}")));
                }
                out.push(Capacity::Finite(v as u32));
            }
        }
        Ok(CapacitySweep(out))
    }
}

/// Cartesian product of several value lists, first list varying slowest.
pub fn product(lists: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}
