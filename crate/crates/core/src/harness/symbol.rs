use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SymbolConfig, SymbolDesign};
use crate::channel::{generate_population, inner, SystemConfig};
use crate::constellation::{fold, make_qam};
use crate::error::{Error, Result};
use crate::sca::{solve_joint, GreedyDesigner, ScaConfig, ScaPoint};
use crate::scheduling::schedule;
use crate::thp::{receive_strong, receive_weak, SuperposedFrame};

/// Symbol-level link statistics of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub trial: usize,
    pub seed: u64,
    pub frames: usize,
    pub clusters: usize,
    /// Strong users' own symbols decided wrongly.
    pub strong_errors: usize,
    /// Weak symbols decided wrongly inside the strong users' SIC stage.
    pub strong_sic_errors: usize,
    /// Weak users' symbols decided wrongly.
    pub weak_errors: usize,
    /// Largest torus distance between the folded, gain-normalized strong
    /// observation and the folded superposed symbol.
    pub max_fold_error: f64,
    pub status: String,
}

/// Schedules, designs, then pushes `frames` random frames through every
/// cluster's strong and weak channel.
pub fn run_symbol_trial(
    system: &SystemConfig,
    sca: &ScaConfig,
    sym: &SymbolConfig,
    trial: usize,
    seed: u64,
) -> Result<SymbolReport> {
    let cfg = system.clone().with_snr_db(sym.snr_db);
    let pop = generate_population(&cfg, seed)?;
    let out = schedule(&pop, &cfg, &GreedyDesigner { sca: *sca })?;
    let a = &out.assignment;
    let (beams, powers) = match sym.design {
        SymbolDesign::Greedy => (out.solution.beams.clone(), out.solution.powers.clone()),
        SymbolDesign::Joint => {
            let init = ScaPoint::from_design(a, &out.solution.beams, &out.solution.powers)?;
            let sol = solve_joint(a, &cfg, sca, &init)?;
            (sol.beams, sol.powers)
        }
    };
    let c = make_qam(sym.qam_order)?;
    let m = c.points.len();
    let n_c = a.len();
    let strong = a.strong_channels();
    let pairs: Vec<(f64, f64)> = powers.iter().map(|p| (p.strong, p.weak)).collect();
    let gains: Vec<(Complex64, Complex64)> = a
        .clusters
        .iter()
        .zip(&beams)
        .map(|(cl, w)| (inner(&cl.strong, w), inner(&cl.weak, w)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let normal = Normal::new(0.0, (cfg.noise_var / 2.0).sqrt()).map_err(|e| Error::Config(e.to_string()))?;
    let noise = |rng: &mut ChaCha8Rng| {
        if sym.awgn {
            Complex64::new(normal.sample(rng), normal.sample(rng))
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let mut rep = SymbolReport {
        trial,
        seed,
        frames: sym.frames,
        clusters: n_c,
        strong_errors: 0,
        strong_sic_errors: 0,
        weak_errors: 0,
        max_fold_error: 0.0,
        status: "ok".into(),
    };
    for _ in 0..sym.frames {
        let d1: Vec<usize> = (0..n_c).map(|_| rng.gen_range(0..m)).collect();
        let d2: Vec<usize> = (0..n_c).map(|_| rng.gen_range(0..m)).collect();
        let frame = SuperposedFrame::encode(&c, d1, d2, &pairs, &beams, &strong)?;
        let s = frame.transmit(&beams);
        for (k, cl) in a.clusters.iter().enumerate() {
            let (p1, p2) = pairs[k];
            let b = frame.modulo[k];
            let (g1, g2) = gains[k];

            let y1 = inner(&cl.strong, &s) + noise(&mut rng);
            let drift = fold(y1 / g1 - frame.x[k], b).norm();
            rep.max_fold_error = rep.max_fold_error.max(drift);
            let (d2_hat, d1_hat) = receive_strong(y1, g1, b, &c, p1, p2)?;
            rep.strong_errors += usize::from(d1_hat != frame.d1[k]);
            rep.strong_sic_errors += usize::from(d2_hat != frame.d2[k]);

            let y2 = inner(&cl.weak, &s) + noise(&mut rng);
            rep.weak_errors += usize::from(receive_weak(y2, g2, b, &c, p1, p2)? != frame.d2[k]);
        }
    }
    debug!(
        "seed {seed}: strong errors {} weak errors {} fold error {:.2e}",
        rep.strong_errors, rep.weak_errors, rep.max_fold_error
    );
    Ok(rep)
}

/// One report per trial; a failing trial is reported with its error status.
pub fn run_symbol_check(cfg: &ExperimentConfig) -> Result<Vec<SymbolReport>> {
    cfg.validate()?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.seed(trial);
            run_symbol_trial(&cfg.system, &cfg.sca, &cfg.symbol, trial, seed).unwrap_or_else(|e| SymbolReport {
                trial,
                seed,
                frames: cfg.symbol.frames,
                clusters: cfg.system.n_clusters,
                strong_errors: 0,
                strong_sic_errors: 0,
                weak_errors: 0,
                max_fold_error: 0.0,
                status: format!("error: {e}"),
            })
        })
        .collect())
}
