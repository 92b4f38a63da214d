//! Function tables as comma-separated text with columns
//! `interval_index,x,re_value,im_value`, floats written with 17 significant digits.

use std::fmt::Write as _;

use mifht_core::chebyshev::cheb1_nodes;
use mifht_core::PiecewiseFunction;
use num_complex::Complex64;

use crate::error::{CliError, CliResult};

pub const HEADER: &str = "interval_index,x,re_value,im_value";

/// A sampled output function.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub rows: Vec<(usize, f64, Complex64)>,
}

impl Table {
    /// Samples `f` at `points` Chebyshev-1 nodes per interval.
    pub fn sample(name: &str, f: &PiecewiseFunction, points: usize) -> Self {
        let nodes: Vec<Vec<f64>> = f
            .system()
            .intervals()
            .iter()
            .map(|iv| cheb1_nodes(points).into_iter().rev().map(|s| iv.from_unit(s)).collect())
            .collect();
        Table {
            name: name.into(),
            rows: f.table(&nodes),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(HEADER);
        out.push('\n');
        for (j, x, v) in &self.rows {
            writeln!(out, "{j},{x:.16e},{:.16e},{:.16e}", v.re, v.im).unwrap();
        }
        out
    }

    pub fn from_csv(name: &str, text: &str) -> CliResult<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(CliError::Schema(format!("table {name}: missing header `{HEADER}`")));
        }
        let rows = lines
            .enumerate()
            .map(|(i, line)| {
                let bad = || CliError::Schema(format!("table {name}, line {}: cannot parse `{line}`", i + 2));
                let cols: Vec<&str> = line.split(',').collect();
                if cols.len() != 4 {
                    return Err(bad());
                }
                let j = cols[0].parse().map_err(|_| bad())?;
                let f = |s: &str| s.parse::<f64>().map_err(|_| bad());
                Ok((j, f(cols[1])?, Complex64::new(f(cols[2])?, f(cols[3])?)))
            })
            .collect::<CliResult<_>>()?;
        Ok(Table { name: name.into(), rows })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(rows in prop::collection::vec((0usize..8, any::<f64>(), any::<f64>(), any::<f64>()), 0..40)) {
            let rows: Vec<_> = rows
                .into_iter()
                .filter(|(_, x, a, b)| x.is_finite() && a.is_finite() && b.is_finite())
                .map(|(j, x, a, b)| (j, x, Complex64::new(a, b)))
                .collect();
            let t = Table { name: "f".into(), rows };
            let back = Table::from_csv("f", &t.to_csv()).unwrap();
            prop_assert_eq!(back.rows.len(), t.rows.len());
            for (p, q) in back.rows.iter().zip(&t.rows) {
                prop_assert_eq!(p.0, q.0);
                prop_assert_eq!(p.1.to_bits(), q.1.to_bits());
                prop_assert_eq!(p.2.re.to_bits(), q.2.re.to_bits());
                prop_assert_eq!(p.2.im.to_bits(), q.2.im.to_bits());
            }
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(Table::from_csv("f", "a,b\n").is_err());
        assert!(Table::from_csv("f", &format!("{HEADER}\n0,1.0,2.0\n")).is_err());
    }
}
