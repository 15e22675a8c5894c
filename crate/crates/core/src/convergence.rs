//! Convergence ladders behind the frozen tolerance constants.

use serde::{Deserialize, Serialize};

use crate::cochain::{integrate_first, FdStep};
use crate::config::Pipeline;
use crate::error::Result;
use crate::kernels::{KernelTable, TableOptions};
use crate::quadrature::CircleRule;
use crate::sampling::Sampler;
use crate::verify::{Verifier, MARGIN};
use crate::zoo::Cocycle;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub name: String,
    /// What `parameter` is: `N`, `h` or `M`.
    pub parameter_name: String,
    pub parameters: Vec<f64>,
    pub errors: Vec<f64>,
    /// Mean instead of max over samples, where the ladder samples points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mean_errors: Vec<f64>,
    /// Observed order between consecutive rungs, `ln(e_i / e_{i+1}) / ln(refinement)`.
    pub orders: Vec<f64>,
}

impl Ladder {
    fn new(name: &str, parameter_name: &str, parameters: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = parameters
            .windows(2)
            .zip(errors.windows(2))
            .map(|(p, e)| {
                // refinement factor > 1 whether the parameter grows (N, M) or shrinks (h)
                let factor = if p[1] > p[0] { p[1] / p[0] } else { p[0] / p[1] };
                (e[0] / e[1]).ln() / factor.ln()
            })
            .collect();
        Ladder {
            name: name.into(),
            parameter_name: parameter_name.into(),
            parameters,
            errors,
            mean_errors: Vec::new(),
            orders,
        }
    }

    /// Least-squares slope of `ln e` against `ln` of the refinement, over all rungs.
    pub fn fitted_order(&self) -> f64 {
        fitted(&self.parameters, &self.errors)
    }

    /// As [`Ladder::fitted_order`] on the mean errors.
    pub fn fitted_mean_order(&self) -> f64 {
        fitted(&self.parameters, &self.mean_errors)
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn fitted(params: &[f64], errors: &[f64]) -> f64 {
    if params.len() < 2 || params.len() != errors.len() {
        return f64::NAN;
    }
    // orientation so that refinement means a larger x
    let grows = params[params.len() - 1] > params[0];
    let xs: Vec<f64> = params.iter().map(|&p| if grows { p.ln() } else { -p.ln() }).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

/// `max |I_N(c)(x) - I_ref(c)(x)|` over seeded 4-tuples for midpoint rules with `N` nodes.
pub fn integral_ladder(cocycle: &Cocycle, reference: &CircleRule, nodes: &[usize], samples: usize, seed: u64) -> Result<Ladder> {
    let s = Sampler::new(seed, "integral_ladder");
    let xs: Vec<Vec<f64>> = (0..samples as u64).map(|k| s.admissible(k, 4, MARGIN)).collect();
    let exact = integrate_first(&cocycle.cochain, reference);
    let exact: Vec<f64> = xs.iter().map(|x| exact.eval(x)).collect();
    let (mut errors, mut means) = (Vec::new(), Vec::new());
    for &n in nodes {
        let approx = integrate_first(&cocycle.cochain, &CircleRule::midpoint(n)?);
        let diffs: Vec<f64> = xs.iter().zip(&exact).map(|(x, &v)| (approx.eval(x) - v).abs()).collect();
        errors.push(diffs.iter().copied().fold(0.0, f64::max));
        means.push(diffs.iter().sum::<f64>() / diffs.len().max(1) as f64);
    }
    let mut ladder = Ladder::new("integral_midpoint", "N", nodes.iter().map(|&n| n as f64).collect(), errors);
    ladder.mean_errors = means;
    Ok(ladder)
}

/// `i_flow` residual under plain central differences with step `h`.
pub fn fd_ladder(pipeline: &Pipeline, steps: &[f64]) -> Ladder {
    let v = Verifier::new(pipeline).planted(false);
    let errors = steps.iter().map(|&h| v.i_flow_residual(FdStep::new(h, false))).collect();
    Ladder::new("i_flow_fd", "h", steps.to_vec(), errors)
}

/// `max |r_M(z) - r_ref(z)|` over 1000 points, `ref` being the last (finest) size.
pub fn table_ladder(cocycle: &Cocycle, rule: &CircleRule, sizes: &[usize], guard: f64) -> Result<Ladder> {
    let tables: Vec<KernelTable> = sizes
        .iter()
        .map(|&m| {
            KernelTable::build(
                &cocycle.cochain,
                rule,
                TableOptions {
                    size: m,
                    guard,
                    ..Default::default()
                },
            )
        })
        .collect::<Result<_>>()?;
    let Some((reference, coarse)) = tables.split_last() else {
        return Ok(Ladder::new("r_table", "M", vec![], vec![]));
    };
    let zs: Vec<f64> = (0..1000)
        .map(|j| 0.01 + (std::f64::consts::TAU - 0.02) * (j as f64 + 0.5) / 1000.0)
        .collect();
    let errors = coarse
        .iter()
        .map(|t| zs.iter().map(|&z| (t.r_at(z) - reference.r_at(z)).norm()).fold(0.0, f64::max))
        .collect();
    let params = sizes[..sizes.len() - 1].iter().map(|&m| m as f64).collect();
    Ok(Ladder::new("r_table", "M", params, errors))
}
