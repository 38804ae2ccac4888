//! Conic Benchmark Format (CBF, version 3) writer for debugging.
//!
//! The dump can be fed to any CBF-reading solver (MOSEK, SCS via converters,
//! ...) to cross-check a subproblem. Mapping from the model:
//!
//! * free scalar variables become one `F` block under `VAR`, in creation order;
//! * each matrix variable becomes a `PSDVAR` of the same dimension;
//! * each constraint becomes its own block under `CON`, in program order:
//!   `L= 1` for equalities, `L+ 1` for inequalities and `EXP 3` for
//!   exponential cones. CBF orders the exponential cone as
//!   `x1 >= x2 exp(x3 / x2)`, so the model triple `(x, y, z)` is written as
//!   `(z, y, x)`;
//! * coefficients on matrix entries go to `FCOORD`/`OBJFCOORD` as the lower
//!   triangle of a symmetric matrix `F` with `<F, X>` equal to the model term.

use std::fmt::Write;

use super::{ConeProgram, Constraint, LinExpr, VarKind};

#[derive(Clone, Copy)]
enum Slot {
    Scalar(usize),
    Psd { var: usize, k: usize, l: usize, scale: f64 },
}

fn slots(prog: &ConeProgram) -> Vec<Slot> {
    let mut out = vec![Slot::Scalar(0); prog.num_variables()];
    let mut scalar = 0;
    let mut psd = 0;
    for info in prog.variables() {
        match info.kind {
            VarKind::Scalar(v) => {
                out[v.index()] = Slot::Scalar(scalar);
                scalar += 1;
            }
            VarKind::Matrix(m) => {
                for col in 0..m.dim() {
                    for row in 0..=col {
                        let scale = if row == col { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                        out[m.offset() + super::svec_index(row, col)] =
                            Slot::Psd { var: psd, k: col, l: row, scale };
                    }
                }
                psd += 1;
            }
        }
    }
    out
}

#[derive(Default)]
struct Coords {
    a: Vec<String>,
    f: Vec<String>,
    b: Vec<String>,
}

impl Coords {
    fn add(&mut self, row: usize, e: &LinExpr, slots: &[Slot]) {
        let e = e.clone().compact();
        for &(i, v) in e.terms() {
            match slots[i] {
                Slot::Scalar(s) => self.a.push(format!("{row} {s} {v:.17e}")),
                Slot::Psd { var, k, l, scale } => {
                    self.f.push(format!("{row} {var} {k} {l} {:.17e}", v * scale))
                }
            }
        }
        if e.constant_part() != 0.0 {
            self.b.push(format!("{row} {:.17e}", e.constant_part()));
        }
    }
}

fn section(out: &mut String, name: &str, lines: &[String]) {
    if lines.is_empty() {
        return;
    }
    let _ = writeln!(out, "{name}\n{}", lines.len());
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out.push('\n');
}

/// Renders the program in CBF version 3.
pub fn to_cbf(prog: &ConeProgram) -> String {
    let slots = slots(prog);
    let mut out = String::from("# cone program dump\nVER\n3\n\nOBJSENSE\nMAX\n\n");

    let psd_dims: Vec<usize> = prog.matrices().iter().map(|m| m.dim()).collect();
    if !psd_dims.is_empty() {
        let _ = writeln!(out, "PSDVAR\n{}", psd_dims.len());
        for d in &psd_dims {
            let _ = writeln!(out, "{d}");
        }
        out.push('\n');
    }
    let scalars = prog.scalar_count();
    if scalars > 0 {
        let _ = writeln!(out, "VAR\n{scalars} 1\nF {scalars}\n");
    }

    let mut blocks = Vec::new();
    let mut coords = Coords::default();
    let mut row = 0;
    for c in prog.constraints() {
        match c {
            Constraint::Zero(e) => {
                blocks.push("L= 1");
                coords.add(row, e, &slots);
                row += 1;
            }
            Constraint::NonNeg(e) => {
                blocks.push("L+ 1");
                coords.add(row, e, &slots);
                row += 1;
            }
            Constraint::Exp([x, y, z]) => {
                blocks.push("EXP 3");
                for e in [z, y, x] {
                    coords.add(row, e, &slots);
                    row += 1;
                }
            }
        }
    }
    if !blocks.is_empty() {
        let _ = writeln!(out, "CON\n{row} {}", blocks.len());
        for b in &blocks {
            let _ = writeln!(out, "{b}");
        }
        out.push('\n');
    }

    let mut obj = Coords::default();
    obj.add(0, prog.objective(), &slots);
    let strip = |v: Vec<String>| -> Vec<String> {
        v.into_iter().map(|s| s.split_once(' ').map(|x| x.1.to_string()).unwrap_or(s)).collect()
    };
    section(&mut out, "OBJFCOORD", &strip(obj.f));
    section(&mut out, "OBJACOORD", &strip(obj.a));
    if prog.objective().constant_part() != 0.0 {
        let _ = writeln!(out, "OBJBCOORD\n{:.17e}\n", prog.objective().constant_part());
    }
    section(&mut out, "FCOORD", &coords.f);
    section(&mut out, "ACOORD", &coords.a);
    section(&mut out, "BCOORD", &coords.b);
    out
}
