use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionParams {
    pub p: f64,
    pub n: usize,
    pub c_exp: f64,
    pub c_big: f64,
    pub r0: f64,
    pub r_max: f64,
    pub sentinel: f64,
    /// Drop the additive term, leaving A(R) = Π (1 + c(R_k)C).
    pub additive: bool,
}

impl RecursionParams {
    pub fn new(p: f64, n: usize) -> Self {
        RecursionParams { p, n, c_exp: 0.5, c_big: 0.1, r0: 256.0, r_max: 2f64.powi(400), sentinel: 1e6, additive: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionStep {
    pub r: f64,
    pub a: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub params: RecursionParams,
    pub exponent: f64,
    pub steps: Vec<RecursionStep>,
    pub sup: f64,
    pub bounded: bool,
}

/// ((n+3)/2)(1/p − (n+1)/(n+3)), snapped to 0 within 1e-12.
pub fn recursion_exponent(p: f64, n: usize) -> f64 {
    let nf = n as f64;
    let e = 0.5 * (nf + 3.0) * (1.0 / p - (nf + 1.0) / (nf + 3.0));
    if e.abs() < 1e-12 {
        0.0
    } else {
        e
    }
}

/// Iterates A(R) = (1 + c(R)C)·sup_{R' ≤ R/2} A(R') + C·c(R)^{-C_exp}R^e over
/// dyadic R from A(R₀) = 1, with c(R) = R^{e/(2C_exp)}.
pub fn iterate_recursion(params: &RecursionParams) -> RecursionTrace {
    let e = recursion_exponent(params.p, params.n);
    let mut steps = vec![RecursionStep { r: params.r0, a: 1.0, c: params.r0.powf(e / (2.0 * params.c_exp)) }];
    let mut sup: f64 = 1.0;
    let mut r = params.r0;
    while r * 2.0 <= params.r_max * (1.0 + 1e-12) {
        r *= 2.0;
        let c = r.powf(e / (2.0 * params.c_exp));
        let add = if params.additive { params.c_big * c.powf(-params.c_exp) * r.powf(e) } else { 0.0 };
        let a = (1.0 + c * params.c_big) * sup + add;
        sup = sup.max(a);
        steps.push(RecursionStep { r, a, c });
        if !sup.is_finite() {
            break;
        }
    }
    RecursionTrace { params: params.clone(), exponent: e, steps, sup, bounded: sup <= params.sentinel }
}

/// exp(Σ_k log(1 + c(R_k)C)) over the steps after R₀.
pub fn closed_form_product(trace: &RecursionTrace) -> f64 {
    trace.steps.iter().skip(1).map(|s| (s.c * trace.params.c_big).ln_1p()).sum::<f64>().exp()
}

pub fn write_trace<W: Write>(out: &mut W, trace: &RecursionTrace) -> std::io::Result<()> {
    writeln!(out, "R,A,c")?;
    for s in &trace.steps {
        writeln!(out, "{:.6e},{:.12e},{:.12e}", s.r, s.a, s.c)?;
    }
    Ok(())
}
