//! CPLEX-style LP text output, readable by most external solvers.

use std::fmt::Write;

use crate::lp::{LinearProgram, RowSense};

fn term(out: &mut String, first: bool, v: f64, name: &str) {
    if first {
        let _ = write!(out, " {v} {name}");
    } else if v < 0.0 {
        let _ = write!(out, " - {} {name}", -v);
    } else {
        let _ = write!(out, " + {v} {name}");
    }
}

fn sanitize(name: String) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' }).collect()
}

pub fn to_lp_format(lp: &LinearProgram, binaries: &[usize]) -> String {
    let col = |j: usize| sanitize(lp.col_name(j));
    let mut out = String::from("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in lp.cost.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, &col(j));
            first = false;
        }
    }
    if lp.offset != 0.0 || first {
        term(&mut out, first, lp.offset, "");
    }
    out.push_str("\nSubject To\n");
    for (r, row) in lp.rows().iter().enumerate() {
        let _ = write!(out, " {}:", sanitize(lp.row_name(r)));
        if row.is_empty() {
            out.push_str(" 0 x0");
        }
        for (i, &(c, v)) in row.iter().enumerate() {
            term(&mut out, i == 0, v, &col(c));
        }
        let sense = match lp.senses[r] {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", lp.rhs[r]);
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_cols() {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let name = col(j);
        let _ = match (l.is_finite(), u.is_finite()) {
            (false, false) => writeln!(out, " {name} free"),
            (true, false) => writeln!(out, " {name} >= {l}"),
            (false, true) => writeln!(out, " -inf <= {name} <= {u}"),
            (true, true) if l == u => writeln!(out, " {name} = {l}"),
            (true, true) => writeln!(out, " {l} <= {name} <= {u}"),
        };
    }
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for &j in binaries {
            let _ = writeln!(out, " {}", col(j));
        }
    }
    out.push_str("End\n");
    out
}
