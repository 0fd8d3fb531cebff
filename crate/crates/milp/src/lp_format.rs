//! Writer for the CPLEX-style LP text format.
//!
//! Layout: `Minimize` with a single objective row named `obj`, `Subject To`
//! with one named row per constraint, `Bounds` listing every variable whose
//! bounds differ from the format default `[0, +inf)`, then `Binaries` and
//! `Generals`, then `End`. A non-zero objective offset is written as a bare
//! constant at the end of the objective expression, which CPLEX, Gurobi and
//! HiGHS all accept. Coefficients use the shortest decimal representation
//! that round-trips the `f64` exactly.

use std::fmt::Write;

use crate::model::{Model, VarKind};

const TERMS_PER_LINE: usize = 8;

pub fn format_coefficient(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "!\"#$%&()/,.;?@_`'{}|~".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
        out.insert(0, '_');
    }
    out
}

fn write_expr(out: &mut String, names: &[String], terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(names.first().map_or("", String::as_str));
        return;
    }
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", format_coefficient(a.abs()), names[j]);
    }
}

pub fn write_lp(model: &Model) -> String {
    let names: Vec<String> = model.variables.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    let _ = writeln!(
        out,
        "\\ {} variables, {} constraints",
        model.num_vars(),
        model.num_constraints()
    );
    out.push_str("Minimize\n obj:");
    let obj_terms: Vec<(usize, f64)> = model
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    if obj_terms.is_empty() && model.num_vars() == 0 {
        out.push_str(" 0");
    } else {
        write_expr(&mut out, &names, &obj_terms);
    }
    if model.objective_offset != 0.0 {
        let c = model.objective_offset;
        let sign = if c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", format_coefficient(c.abs()));
    }
    out.push_str("\nSubject To\n");
    for (i, row) in model.constraints.iter().enumerate() {
        let name = if row.name.is_empty() {
            format!("c{}", i + 1)
        } else {
            sanitize(&row.name)
        };
        let _ = write!(out, " {name}:");
        let terms: Vec<(usize, f64)> = row.terms.iter().copied().filter(|t| t.1 != 0.0).collect();
        write_expr(&mut out, &names, &terms);
        let _ = writeln!(
            out,
            " {} {}",
            row.sense.symbol(),
            format_coefficient(row.rhs)
        );
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        let (l, u) = (v.lower, v.upper);
        if v.kind == VarKind::Binary && l == 0.0 && u == 1.0 {
            continue;
        }
        if l == 0.0 && u == f64::INFINITY {
            continue;
        }
        let _ = match (l.is_finite(), u.is_finite()) {
            (false, false) => writeln!(out, " {name} free"),
            (true, false) => writeln!(out, " {name} >= {}", format_coefficient(l)),
            (false, true) => writeln!(out, " -inf <= {name} <= {}", format_coefficient(u)),
            (true, true) if l == u => writeln!(out, " {name} = {}", format_coefficient(l)),
            (true, true) => writeln!(
                out,
                " {} <= {name} <= {}",
                format_coefficient(l),
                format_coefficient(u)
            ),
        };
    }
    for (header, kind) in [
        ("Binaries", VarKind::Binary),
        ("Generals", VarKind::Integer),
    ] {
        let list: Vec<&String> = model
            .variables
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == kind)
            .map(|(_, n)| n)
            .collect();
        if list.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{header}");
        for chunk in list.chunks(TERMS_PER_LINE) {
            out.push(' ');
            out.push_str(
                &chunk
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}
