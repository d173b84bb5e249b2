//! Agreement check between the basis and Gram routes of `cos(b, A)` on
//! random full-rank instances.

use crate::corpus::Lcg;
use crate::groupsim::{build_projector, GroupCosine};
use crate::linalg::{GramFactorization, VectorGroup};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub trials: usize,
    /// Instances the Gram route rejected as singular and that were redrawn.
    pub redrawn: usize,
    pub max_abs_diff: f64,
    pub tolerance: f64,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.max_abs_diff <= self.tolerance
    }
}

fn uniform(rng: &mut Lcg) -> f64 {
    let unit = (rng.next() >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * unit - 1.0
}

/// Draws `trials` instances with `d ∈ [2, 16]`, `n ∈ [1, d]` and entries in
/// `[-1, 1]`, and records the largest disagreement between the routes.
pub fn run(
    trials: usize,
    seed: u64,
    rank_tol: f64,
    agreement_tol: f64,
) -> crate::Result<SelfTestReport> {
    let mut rng = Lcg(seed);
    let mut report = SelfTestReport {
        trials: 0,
        redrawn: 0,
        max_abs_diff: 0.0,
        tolerance: agreement_tol,
    };
    while report.trials < trials {
        let d = 2 + rng.below(15);
        let n = 1 + rng.below(d);
        let data: Vec<f64> = (0..n * d).map(|_| uniform(&mut rng)).collect();
        let b: Vec<f64> = (0..d).map(|_| uniform(&mut rng)).collect();
        let group = VectorGroup::from_flat(d, data)?;
        let gram = match GramFactorization::new(&group, rank_tol) {
            Ok(g) => g,
            Err(Error::SingularGram { .. }) => {
                report.redrawn += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let projector = build_projector(&group, rank_tol)?;
        let diff = (gram.cos_to_group(&b)? - projector.cos_to_group(&b)?).abs();
        report.max_abs_diff = report.max_abs_diff.max(diff);
        report.trials += 1;
    }
    Ok(report)
}
