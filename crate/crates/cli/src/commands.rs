use std::path::Path;

use anyhow::{Context, Result};
use logcount_core::approx::{ApproxCounter, ExpansionContext};
use logcount_core::baselines::{f1_square_sums, HybridConfig, HybridCounter, HybridModel, UnboundedVariant};
use logcount_core::factor::{coeffs_f, coeffs_f1};
use logcount_core::mechanism::{variance_profile, LogMatrixCounter, PrivacyParams, SideInfo};
use logcount_core::sensitivity::{compute_sensitivity, DEFAULT_TOL};
use logcount_core::{Error, FactorPair, FactorParams, Sides};

use crate::grid::variance_grid;
use crate::output::{emit, Num, Table};
use crate::svg::{line_chart, Series};
use crate::{Command, FactorArgs, Format, RunArgs};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

impl FactorArgs {
    fn params(&self) -> Result<FactorParams> {
        Ok(FactorParams::new(self.gamma, self.delta_log.unwrap_or(-self.gamma))?)
    }
}

impl RunArgs {
    fn privacy(&self) -> Result<PrivacyParams> {
        Ok(PrivacyParams::new(self.eps, self.delta_priv)?)
    }

    fn hybrid(&self, variant: UnboundedVariant) -> Result<HybridConfig> {
        Ok(HybridConfig {
            rho: self.rho,
            unbounded: variant,
            reuse: !self.no_reuse,
            params: self.factor.params()?,
        })
    }
}

fn check_t_max(t_max: usize) -> Result<()> {
    if t_max == 0 {
        return Err(invalid("--t-max must be at least 1"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Mechanism {
    LogMatrix(FactorParams),
    Approx,
    Sqrt,
    Hybrid(UnboundedVariant),
}

fn mechanism(id: &str, run: &RunArgs) -> Result<Mechanism> {
    let gamma = run.factor.gamma;
    Ok(match id {
        "logmatrix" => Mechanism::LogMatrix(run.factor.params()?),
        "logmatrix-fast" => Mechanism::LogMatrix(FactorParams::fast(gamma)),
        "logmatrix-balanced" => Mechanism::LogMatrix(FactorParams::balanced(gamma)),
        "logmatrix-large-n" => Mechanism::LogMatrix(FactorParams::large_n(gamma)),
        "approx" => Mechanism::Approx,
        "sqrt" => Mechanism::Sqrt,
        "hybrid-indep" => Mechanism::Hybrid(UnboundedVariant::Independent),
        "hybrid-log" => Mechanism::Hybrid(UnboundedVariant::LogMatrix),
        other => return Err(invalid(format!("unknown mechanism `{other}`"))),
    })
}

/// Exact variance of `mech` at each step in `ts` (all `<= run.t_max`).
fn variances(mech: Mechanism, run: &RunArgs, ts: &[usize]) -> Result<Vec<f64>> {
    let privacy = run.privacy()?;
    let t_max = run.t_max;
    match mech {
        Mechanism::LogMatrix(params) => {
            let delta = compute_sensitivity(params, DEFAULT_TOL)?.delta;
            let profile = variance_profile(params, privacy.c * delta, t_max)?;
            Ok(ts.iter().map(|&t| profile[t - 1]).collect())
        }
        Mechanism::Approx => {
            let hint = SideInfo::new(t_max, 1.0)?;
            let counter = ApproxCounter::init(run.factor.params()?, privacy, run.order, run.eta, run.seed, Some(hint))?;
            ts.iter().map(|&t| Ok(counter.variance_at(t)?)).collect()
        }
        Mechanism::Sqrt => {
            let s = f1_square_sums(t_max)?;
            Ok(ts.iter().map(|&t| privacy.c * privacy.c * s[t_max] * s[t]).collect())
        }
        Mechanism::Hybrid(variant) => {
            let model = HybridModel::new(run.hybrid(variant)?, privacy, t_max as u64)?;
            ts.iter().map(|&t| Ok(model.variance(t as u64)?)).collect()
        }
    }
}

fn run_meta(table: &mut Table, run: &RunArgs) {
    table.meta("gamma", Num(run.factor.gamma));
    table.meta("delta_log", Num(run.factor.delta_log.unwrap_or(-run.factor.gamma)));
    table.meta("eps", Num(run.eps));
    table.meta("delta_priv", Num(run.delta_priv));
    table.meta("t_max", run.t_max);
    table.meta("seed", run.seed);
}

fn hybrid_meta(table: &mut Table, run: &RunArgs) {
    table.meta("rho", Num(run.rho));
    table.meta("reuse", if run.no_reuse { "none" } else { "finished-epochs" });
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Coeffs { factor, t_max, out } => {
            check_t_max(t_max)?;
            let params = factor.params()?;
            let mut pair = FactorPair::new(params, Sides::Both);
            pair.extend_to(t_max)?;
            let (l, r) = (pair.left()?, pair.right()?);
            let f1 = coeffs_f1(t_max)?;
            let mut table = Table::new(&["m", "coeff_L", "coeff_R", "coeff_f1"]);
            for m in 0..t_max {
                table.row(&[&m, &Num(l[m]), &Num(r[m]), &Num(f1[m])]);
            }
            table.meta("gamma", Num(params.gamma));
            table.meta("delta_log", Num(params.delta_log));
            emit(out.output.as_deref(), &table.render())
        }
        Command::Sensitivity { factor, tol, out } => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(invalid(format!("--tol must lie in (0, 1), got {tol}")));
            }
            let params = factor.params()?;
            let s = compute_sensitivity(params, tol)?;
            let mut table = Table::new(&["delta_sq", "delta", "quad_error"]);
            table.row(&[&Num(s.delta_sq), &Num(s.delta), &Num(s.quad_error_estimate)]);
            table.meta("gamma", Num(params.gamma));
            table.meta("delta_log", Num(params.delta_log));
            table.meta("tol", Num(tol));
            emit(out.output.as_deref(), &table.render())
        }
        Command::Variance { mechanism: id, run, out } => {
            check_t_max(run.t_max)?;
            let mech = mechanism(&id, &run)?;
            let ts = variance_grid(run.t_max);
            let vs = variances(mech, &run, &ts)?;
            let mut table = Table::new(&["t", "variance"]);
            for (t, v) in ts.iter().zip(&vs) {
                table.row(&[t, &Num(*v)]);
            }
            table.meta("mechanism", &id);
            run_meta(&mut table, &run);
            if matches!(mech, Mechanism::Hybrid(_)) {
                hybrid_meta(&mut table, &run);
            }
            emit(out.output.as_deref(), &table.render())
        }
        Command::Compare { mechanisms, run, format, out } => {
            check_t_max(run.t_max)?;
            if mechanisms.is_empty() {
                return Err(invalid("--mechanisms must name at least one mechanism"));
            }
            let ts = variance_grid(run.t_max);
            let mut columns = Vec::new();
            for id in &mechanisms {
                let mech = mechanism(id, &run)?;
                columns.push(variances(mech, &run, &ts)?);
            }
            let text = match format {
                Format::Csv => {
                    let mut table = Table::new(&["t", "mechanism", "variance"]);
                    for (i, t) in ts.iter().enumerate() {
                        for (id, col) in mechanisms.iter().zip(&columns) {
                            table.row(&[t, id, &Num(col[i])]);
                        }
                    }
                    table.meta("mechanisms", mechanisms.join(";"));
                    run_meta(&mut table, &run);
                    hybrid_meta(&mut table, &run);
                    table.render()
                }
                Format::Svg => {
                    let series: Vec<Series> = mechanisms
                        .iter()
                        .zip(&columns)
                        .map(|(id, col)| Series {
                            name: id.clone(),
                            points: ts.iter().zip(col).map(|(&t, &v)| (t as f64, v)).collect(),
                        })
                        .collect();
                    line_chart("Variance of the counter output", &series)
                }
            };
            emit(out.output.as_deref(), &text)
        }
        Command::Simulate { mechanism: id, input, run, n0, c_factor, out } => {
            let xs = read_input(&input)?;
            let side = match (n0, c_factor) {
                (Some(n0), c) => Some(SideInfo::new(n0, c.unwrap_or(1.0))?),
                (None, Some(_)) => return Err(invalid("--c-factor needs --n0")),
                (None, None) => None,
            };
            let mech = mechanism(&id, &run)?;
            let privacy = run.privacy()?;
            let mut counter: Box<dyn FnMut(f64) -> logcount_core::Result<f64>> = match mech {
                Mechanism::LogMatrix(params) => {
                    let mut c = LogMatrixCounter::init(params, privacy, run.seed, side)?;
                    Box::new(move |x| c.step(x))
                }
                Mechanism::Approx => {
                    let mut c = ApproxCounter::init(run.factor.params()?, privacy, run.order, run.eta, run.seed, side)?;
                    Box::new(move |x| c.step(x))
                }
                Mechanism::Hybrid(variant) => {
                    let mut c = HybridCounter::new(run.hybrid(variant)?, privacy, run.seed)?;
                    Box::new(move |x| c.step(x))
                }
                Mechanism::Sqrt => return Err(invalid("the sqrt mechanism is bounded and has no streaming mode")),
            };
            let mut table = Table::new(&["t", "x", "true_sum", "estimate"]);
            let mut sum = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let estimate = counter(x)?;
                sum += x;
                table.row(&[&(i + 1), &Num(x), &Num(sum), &Num(estimate)]);
            }
            table.meta("mechanism", &id);
            table.meta("input", &input);
            run_meta(&mut table, &run);
            emit(out.output.as_deref(), &table.render())
        }
        Command::ApproxError { factor, order, t_max, out } => {
            if t_max <= 17 {
                return Err(invalid("--t-max must exceed 17 (the expansion needs index >= 16)"));
            }
            let params = factor.params()?;
            let ctx = ExpansionContext::new(params, order)?;
            let exact = coeffs_f(params, t_max)?;
            let mut table = Table::new(&["t", "exact", "approx", "rel_error"]);
            for t in variance_grid(t_max).into_iter().filter(|&t| t > 16) {
                let e = exact[t - 1];
                let a = ctx.coeff(t - 1)?;
                table.row(&[&t, &Num(e), &Num(a), &Num(((a - e) / e).abs())]);
            }
            table.meta("gamma", Num(params.gamma));
            table.meta("delta_log", Num(params.delta_log));
            table.meta("K", order);
            emit(out.output.as_deref(), &table.render())
        }
    }
}

fn read_input(spec: &str) -> Result<Vec<f64>> {
    let count = |n: &str| -> Result<usize> {
        n.parse().map_err(|_| invalid(format!("bad length in --input `{spec}`")))
    };
    if let Some(n) = spec.strip_prefix("zeros:") {
        return Ok(vec![0.0; count(n)?]);
    }
    if let Some(n) = spec.strip_prefix("ones:") {
        return Ok(vec![1.0; count(n)?]);
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("reading {path}"))?;
        return text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.parse::<f64>().map_err(|_| invalid(format!("not a number in {path}: `{l}`"))))
            .collect();
    }
    Err(invalid(format!("--input must be zeros:N, ones:N or file:PATH, got `{spec}`")))
}
