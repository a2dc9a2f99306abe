//! CPLEX LP text for external MILP solvers.

use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{LinearModel, Sense, VarKind};

const LINE_WIDTH: usize = 200;

/// `x` with 12 significant digits, trailing zeros removed.
pub fn format_coefficient(x: f64) -> String {
    if x == 0.0 {
        return String::from("0");
    }
    let exp = libm::floor(libm::log10(x.abs())) as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    };
    trim(&s)
}

fn trim(s: &str) -> String {
    let (mantissa, exponent) = match s.find('e') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
    format!("{mantissa}{exponent}")
}

fn push_terms(out: &mut String, m: &LinearModel, head: &str, terms: &[(usize, f64)]) {
    let mut line = String::from(head);
    if terms.is_empty() {
        line.push_str(" 0");
    }
    for (k, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 { " -" } else if k == 0 { "" } else { " +" };
        let mag = c.abs();
        let piece = if mag == 1.0 {
            format!("{sign} {}", m.variables[v].name)
        } else {
            format!("{sign} {} {}", format_coefficient(mag), m.variables[v].name)
        };
        if line.len() + piece.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
    out.push('\n');
}

/// Renders `m` with sections Maximize, Subject To, Bounds, Binaries, End.
pub fn to_lp_string(m: &LinearModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ model {}", m.name);
    out.push_str("Maximize\n");
    push_terms(&mut out, m, " obj:", &m.objective);
    out.push_str("Subject To\n");
    for row in &m.constraints {
        let mut body = String::new();
        push_terms(&mut body, m, &format!(" {}:", row.name), &row.terms);
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let body = body.trim_end_matches('\n');
        let _ = writeln!(out, "{body} {op} {}", format_coefficient(row.rhs));
    }
    out.push_str("Bounds\n");
    for var in &m.variables {
        let (lo, hi) = (format_coefficient(var.lower), format_coefficient(var.upper));
        match var.kind {
            VarKind::Binary if var.lower == 0.0 => {}
            _ => {
                let _ = writeln!(out, " {lo} <= {} <= {hi}", var.name);
            }
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for var in m.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        if line.len() + var.name.len() + 1 > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(&var.name);
    }
    if !line.is_empty() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
