//! Timing of evaluation before and after minimization.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::eval::{evaluate, AssignmentRelation, EvalError, Structure};
use crate::formula::Formula;
use crate::minimize::{minimize_with, MinimizeError, TwStrategy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub width_before: usize,
    pub width_after: usize,
    pub time_before_ms: f64,
    pub time_after_ms: f64,
    pub speedup: f64,
    /// Both formulas gave the same answer.
    pub agree: bool,
}

fn median_time(f: &Formula, s: &Structure, repeats: usize) -> Result<(Duration, AssignmentRelation), EvalError> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let r = evaluate(f, s)?;
        times.push(start.elapsed());
        last = Some(r);
    }
    times.sort();
    Ok((times[times.len() / 2], last.expect("at least one run")))
}

/// Minimizes `f`, then evaluates both versions on `s`, `repeats` times each;
/// times are medians.
pub fn bench(f: &Formula, s: &Structure, repeats: usize, strategy: TwStrategy) -> Result<BenchReport, BenchError> {
    let (g, report) = minimize_with(f, strategy)?;
    let (before, r1) = median_time(f, s, repeats)?;
    let (after, r2) = median_time(&g, s, repeats)?;
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    Ok(BenchReport {
        schema: 1,
        width_before: report.input_width,
        width_after: report.output_width,
        time_before_ms: ms(before),
        time_after_ms: ms(after),
        speedup: ms(before) / ms(after).max(1e-6),
        agree: r1 == r2,
    })
}
