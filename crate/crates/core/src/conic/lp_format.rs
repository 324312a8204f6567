//! Text dump of a program in the CPLEX LP format, for cross-checking with
//! external solvers. Norm cones are written with auxiliary variables; Euclidean
//! cones become quadratic constraints.

use std::fmt::Write;

use crate::distributions::NormKind;
use crate::scalar::Real;

use super::ConicProgram;

fn term<T: Real>(out: &mut String, coef: T, name: &str) {
    let c = coef.to_f64_lossy();
    if c >= 0.0 {
        let _ = write!(out, " + {c} {name}");
    } else {
        let _ = write!(out, " - {} {name}", -c);
    }
}

fn var(i: usize) -> String {
    format!("x{i}")
}

pub fn to_lp_string<T: Real>(p: &ConicProgram<T>) -> String {
    let mut s = String::new();
    s.push_str("\\ objective offset ");
    let _ = writeln!(s, "{}", p.objective_offset.to_f64_lossy());
    s.push_str("Minimize\n obj:");
    let mut any = false;
    for (i, &c) in p.objective.iter().enumerate() {
        if c != T::zero() {
            term(&mut s, c, &var(i));
            any = true;
        }
    }
    if !any {
        s.push_str(" 0 x0");
    }
    s.push_str("\nSubject To\n");
    let mut row = 0usize;
    let mut emit =
        |s: &mut String, terms: &[(usize, T)], extra: &[(T, String)], sense: &str, rhs: f64| {
            let _ = write!(s, " r{row}:");
            for &(v, c) in terms {
                term(s, c, &var(v));
            }
            for (c, name) in extra {
                term(s, *c, name);
            }
            if terms.is_empty() && extra.is_empty() {
                s.push_str(" 0 x0");
            }
            let _ = writeln!(s, " {sense} {rhs}");
            row += 1;
        };
    for r in &p.eq_rows {
        emit(&mut s, &r.terms, &[], "=", r.rhs.to_f64_lossy());
    }
    for r in &p.le_rows {
        emit(&mut s, &r.terms, &[], "<=", r.rhs.to_f64_lossy());
    }
    let mut aux = Vec::new();
    for (ci, c) in p.cones.iter().enumerate() {
        let bound = var(c.bound);
        match c.norm {
            NormKind::Linf | NormKind::L1 => {
                for (k, e) in c.entries.iter().enumerate() {
                    let u = format!("u{ci}_{k}");
                    let t = if c.norm == NormKind::Linf {
                        bound.clone()
                    } else {
                        u.clone()
                    };
                    if c.norm == NormKind::L1 {
                        aux.push(u.clone());
                    }
                    let neg: Vec<(usize, T)> = e.terms.iter().map(|&(v, x)| (v, -x)).collect();
                    let rhs = -e.constant.to_f64_lossy();
                    emit(&mut s, &e.terms, &[(-T::one(), t.clone())], "<=", rhs);
                    emit(&mut s, &neg, &[(-T::one(), t)], "<=", -rhs);
                }
                if c.norm == NormKind::L1 {
                    let mut extra: Vec<(T, String)> = (0..c.entries.len())
                        .map(|k| (T::one(), format!("u{ci}_{k}")))
                        .collect();
                    extra.push((-T::one(), bound));
                    emit(&mut s, &[], &extra, "<=", 0.0);
                }
            }
            NormKind::L2 => {
                let mut names = Vec::new();
                for (k, e) in c.entries.iter().enumerate() {
                    let y = format!("y{ci}_{k}");
                    emit(
                        &mut s,
                        &e.terms,
                        &[(-T::one(), y.clone())],
                        "=",
                        -e.constant.to_f64_lossy(),
                    );
                    aux.push(y.clone());
                    names.push(y);
                }
                let _ = write!(s, " q{ci}: [");
                for y in &names {
                    let _ = write!(s, " {y} ^2 +");
                }
                let _ = writeln!(s, " 0 {bound} - {bound} ^2 ] <= 0");
                let _ = writeln!(s, " qb{ci}: {bound} >= 0");
            }
        }
    }
    s.push_str("Bounds\n");
    for i in 0..p.n_vars() {
        let name = var(i);
        match (p.lower[i], p.upper[i]) {
            (None, None) => {
                let _ = writeln!(s, " {name} free");
            }
            (Some(l), None) => {
                let _ = writeln!(s, " {name} >= {}", l.to_f64_lossy());
            }
            (None, Some(u)) => {
                let _ = writeln!(s, " -inf <= {name} <= {}", u.to_f64_lossy());
            }
            (Some(l), Some(u)) => {
                let _ = writeln!(s, " {} <= {name} <= {}", l.to_f64_lossy(), u.to_f64_lossy());
            }
        }
    }
    for a in aux {
        let _ = writeln!(s, " {a} free");
    }
    s.push_str("End\n");
    s
}
