//! Re-evaluation of metrics on retained iterates.

use pmqsopt::driver::grad_evals_per_iteration;
use pmqsopt::linalg;
use pmqsopt::metrics::{residual_row, Accumulator, MetricMode};
use pmqsopt::problem::StochasticProblem;

use crate::error::{CliError, CliResult};
use crate::experiment::IterateFile;
use crate::table::Table;

/// Evaluates `mode` at `x^{t+1}` for every `t` that is a multiple of
/// `stride` (and at `t = T`), with running averages over the evaluated
/// iterates. Solver columns are left empty.
pub fn reevaluate<P: StochasticProblem + ?Sized>(
    problem: &P,
    file: &IterateFile,
    batch_size: usize,
    mode: MetricMode,
    alpha: f64,
    stride: usize,
) -> CliResult<Table> {
    let horizon = file.schedule.horizon;
    if file.iterates.len() != horizon + 1 {
        return Err(CliError::Usage(format!(
            "iterate file holds {} states; expected T + 1 = {}",
            file.iterates.len(),
            horizon + 1
        )));
    }
    if stride == 0 {
        return Err(CliError::Usage("stride must be at least 1".into()));
    }
    let p = problem.num_constraints();
    let per_iter = grad_evals_per_iteration(batch_size, p);
    let mut acc = Accumulator::default();
    let mut rows = Vec::new();
    for t in (1..=horizon).filter(|t| t % stride == 0 || *t == horizon) {
        let state = &file.iterates[t];
        if state.x.len() != problem.dim() || state.lambda.len() != p {
            return Err(CliError::Usage(format!(
                "iterate {t} does not match the instance dimensions"
            )));
        }
        let r = residual_row(problem, t, &state.x, &state.lambda, alpha, mode)?;
        let avg = acc.push(&r);
        rows.push([
            Some(t as f64),
            Some((per_iter * t as u64) as f64),
            Some(problem.full_objective(&state.x, None)),
            Some(r.cons),
            Some(linalg::norm(&state.lambda)),
            Some(avg.r_kkt_sq),
            Some(avg.r_cons),
            Some(avg.r_comp_abs),
            None,
            None,
        ]);
    }
    Ok(Table { rows })
}
