//! CPLEX LP text format. Output depends only on the model, so equal models give
//! byte-identical files.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use super::MilpModel;

const LINE_WIDTH: usize = 200;

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn push_terms(out: &mut String, head: &str, terms: &[(usize, f64)], m: &MilpModel) {
    let mut line = format!(" {head}");
    for &(v, c) in terms {
        let sign = if c < 0.0 { '-' } else { '+' };
        let piece = format!(" {sign} {} {}", num(c.abs()), m.vars[v].name());
        if line.len() + piece.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from("  ");
        }
        line.push_str(&piece);
    }
    if terms.is_empty() {
        // A constraint needs at least one variable; zero times the first one is harmless.
        line.push_str(&format!(" + 0 {}", m.vars[0].name()));
    }
    out.push_str(&line);
}

pub fn export_lp(m: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ rail-guided vehicle routing model\n");
    out.push_str("Minimize\n");
    push_terms(&mut out, "obj:", &m.objective, m);
    out.push_str("\nSubject To\n");
    for r in &m.rows {
        if r.is_equality() {
            push_terms(&mut out, &format!("{}:", r.name), &r.coeffs, m);
            let _ = writeln!(out, " = {}", num(r.hi));
            continue;
        }
        let has_lo = r.lo.is_finite();
        let has_hi = r.hi.is_finite();
        if has_lo {
            let name = if has_hi { format!("{}_lo:", r.name) } else { format!("{}:", r.name) };
            push_terms(&mut out, &name, &r.coeffs, m);
            let _ = writeln!(out, " >= {}", num(r.lo));
        }
        if has_hi {
            let name = if has_lo { format!("{}_hi:", r.name) } else { format!("{}:", r.name) };
            push_terms(&mut out, &name, &r.coeffs, m);
            let _ = writeln!(out, " <= {}", num(r.hi));
        }
    }
    out.push_str("Bounds\n");
    for v in m.vars.iter().filter(|v| !v.binary) {
        let name = v.name();
        if v.lb == v.ub {
            let _ = writeln!(out, " {name} = {}", num(v.lb));
        } else if v.ub.is_finite() {
            let _ = writeln!(out, " {} <= {name} <= {}", num(v.lb), num(v.ub));
        } else {
            let _ = writeln!(out, " {name} >= {}", num(v.lb));
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for v in m.vars.iter().filter(|v| v.binary) {
        let name = v.name();
        if line.len() + name.len() + 1 > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(&name);
    }
    if !line.is_empty() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

pub fn write_lp(m: &MilpModel, path: &Path) -> io::Result<()> {
    std::fs::write(path, export_lp(m))
}
