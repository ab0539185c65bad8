//! Compact mixed-integer model in LP text format.
//!
//! Variables: `z_i_c` (point `i` in cluster `c`, binary) and `l_t_c`, `r_t_c`
//! (lower and upper box bound of cluster `c` in coordinate `t`). With
//! `min_t`/`max_t` the instance extremes:
//!
//! ```text
//! min   sum_c sum_t r_t_c - l_t_c
//! st    sum_c z_i_c = 1                          assign_i
//!       l_t_c + (max_t - x_it) z_i_c <= max_t    lo_i_c_t
//!       r_t_c + (min_t - x_it) z_i_c >= min_t    hi_i_c_t
//!       l_t_c - r_t_c <= 0                       cross_c_t
//!       min_t <= l_t_c, r_t_c <= max_t
//!       z_i_c binary
//! ```

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{HrcpError, Result};
use crate::geometry::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

impl RowSense {
    fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub sense: RowSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub comment: String,
    /// Minimized linear objective.
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<LpRow>,
    /// `(lower, variable, upper)` for each bounded continuous variable.
    pub bounds: Vec<(f64, String, f64)>,
    pub binaries: Vec<String>,
}

impl LpModel {
    pub fn variable_count(&self) -> usize {
        self.bounds.len() + self.binaries.len()
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_lp_string().as_bytes())?;
        Ok(())
    }

    pub fn to_lp_string(&self) -> String {
        let mut s = String::new();
        for line in self.comment.lines() {
            let _ = writeln!(s, "\\ {line}");
        }
        s.push_str("minimize\n obj:");
        push_terms(&mut s, &self.objective);
        s.push_str("\nst\n");
        for row in &self.rows {
            let _ = write!(s, " {}:", row.name);
            push_terms(&mut s, &row.terms);
            let _ = writeln!(s, " {} {}", row.sense.symbol(), row.rhs);
        }
        s.push_str("bounds\n");
        for (lo, var, hi) in &self.bounds {
            let _ = writeln!(s, " {lo} <= {var} <= {hi}");
        }
        s.push_str("binary\n");
        for var in &self.binaries {
            let _ = writeln!(s, " {var}");
        }
        s.push_str("end\n");
        s
    }
}

fn push_terms(s: &mut String, terms: &[(f64, String)]) {
    for (k, (coef, var)) in terms.iter().enumerate() {
        let sign = if coef.is_sign_negative() { "-" } else { "+" };
        let mag = coef.abs();
        if k == 0 && sign == "+" {
            s.push(' ');
        } else {
            let _ = write!(s, " {sign} ");
        }
        if mag != 1.0 {
            let _ = write!(s, "{mag} ");
        }
        s.push_str(var);
    }
}

fn z(i: usize, c: usize) -> String {
    format!("z_{i}_{c}")
}

fn l(t: usize, c: usize) -> String {
    format!("l_{t}_{c}")
}

fn r(t: usize, c: usize) -> String {
    format!("r_{t}_{c}")
}

/// Builds the compact model for `instance` with `p` clusters.
pub fn compact_model(instance: &Instance, p: usize) -> Result<LpModel> {
    if p == 0 {
        return Err(HrcpError::param("p must be at least 1"));
    }
    let (n, d) = (instance.len(), instance.dim());
    let (min, max) = (instance.lo(), instance.hi());

    let mut objective = Vec::with_capacity(2 * p * d);
    for c in 0..p {
        for t in 0..d {
            objective.push((1.0, r(t, c)));
            objective.push((-1.0, l(t, c)));
        }
    }

    let mut rows = Vec::with_capacity(n + 2 * n * p * d + p * d);
    for i in 0..n {
        rows.push(LpRow {
            name: format!("assign_{i}"),
            terms: (0..p).map(|c| (1.0, z(i, c))).collect(),
            sense: RowSense::Eq,
            rhs: 1.0,
        });
    }
    for i in 0..n {
        let x = instance.point(i);
        for c in 0..p {
            for t in 0..d {
                rows.push(LpRow {
                    name: format!("lo_{i}_{c}_{t}"),
                    terms: vec![(1.0, l(t, c)), (max[t] - x[t], z(i, c))],
                    sense: RowSense::Le,
                    rhs: max[t],
                });
                rows.push(LpRow {
                    name: format!("hi_{i}_{c}_{t}"),
                    terms: vec![(1.0, r(t, c)), (min[t] - x[t], z(i, c))],
                    sense: RowSense::Ge,
                    rhs: min[t],
                });
            }
        }
    }
    for c in 0..p {
        for t in 0..d {
            rows.push(LpRow {
                name: format!("cross_{c}_{t}"),
                terms: vec![(1.0, l(t, c)), (-1.0, r(t, c))],
                sense: RowSense::Le,
                rhs: 0.0,
            });
        }
    }

    let mut bounds = Vec::with_capacity(2 * p * d);
    for c in 0..p {
        for t in 0..d {
            bounds.push((min[t], l(t, c), max[t]));
            bounds.push((min[t], r(t, c), max[t]));
        }
    }
    let binaries = (0..n).flat_map(|i| (0..p).map(move |c| z(i, c))).collect();

    Ok(LpModel {
        comment: format!("hyper-rectangular clustering, compact model\nn = {n}, p = {p}, d = {d}"),
        objective,
        rows,
        bounds,
        binaries,
    })
}

pub fn export_compact_model<W: Write>(instance: &Instance, p: usize, out: W) -> Result<LpModel> {
    let model = compact_model(instance, p)?;
    model.write(out)?;
    Ok(model)
}
