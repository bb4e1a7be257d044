//! Isolation of typical solutions: distance from a uniform solution to the
//! nearest other one.

use rand::Rng;
use sbp_core::{
    model::{nearest_other_solution, nth_solution, sample_matrix, CountOptions, GrayScanner, LIST_MAX_N},
    theory::alpha_c,
};

use super::{model_params, proportion, replica_err, replica_header, rng, timed, verdict, ExperimentOutput};
use crate::{
    config::ExperimentConfig,
    error::{LabError, Result},
    runner::replicate,
};

/// Outcome of one replica; `None` when every retry gave `Z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Found {
    z: u64,
    /// Nearest other solution within the largest radius, if any.
    nearest: Option<usize>,
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ac = alpha_c(config.kappa.value())?;
    let mut out = ExperimentOutput::default();
    for (ni, &n) in config.n.iter().enumerate() {
        if n > LIST_MAX_N {
            return Err(LabError::Precondition(format!(
                "freezing needs uniform solutions, available for n <= {LIST_MAX_N} (got {n})"
            )));
        }
        let radii: Vec<usize> = config.distances.iter().map(|d| d.radius(n).min(n)).collect();
        let r_max = radii.iter().copied().max().unwrap_or(0);
        for (fi, &factor) in config.alpha_factors.iter().enumerate() {
            let grid = ni * config.alpha_factors.len() + fi;
            let m = ((factor * ac * n as f64).floor() as usize).max(1);
            let params = model_params(config.kappa, n, m, config.seed, false)?;
            let results = replicate(config.workers, config.replicas, |r| {
                timed(config, || {
                    let rng = &mut rng(config, grid, r);
                    let mut found = None;
                    let mut attempts = 0;
                    while found.is_none() && attempts < config.retry_budget {
                        attempts += 1;
                        let g = sample_matrix(&params, rng);
                        let scanner = GrayScanner::new(&g, &params.kappa, &CountOptions::default()).map_err(replica_err(r))?;
                        let half = scanner.half_counts();
                        let z = 2 * half.iter().sum::<u64>();
                        if z == 0 {
                            continue;
                        }
                        let x = nth_solution(&scanner, &half, rng.random_range(0..z)).map_err(replica_err(r))?;
                        let nearest = nearest_other_solution(&g, &x, &params.kappa, r_max).map_err(replica_err(r))?;
                        found = Some(Found { z, nearest });
                    }
                    let mut rec = replica_header(config, grid, r);
                    rec.put_int("n", n as u64)
                        .put_real("alpha_factor", factor)
                        .put_int("m", m as u64)
                        .put_int("attempts", attempts as u64)
                        .put_bool("skipped", found.is_none())
                        .put_opt_int("z", found.map(|f| f.z))
                        .put_opt_int("nearest", found.and_then(|f| f.nearest.map(|d| d as u64)))
                        .put_int("search_radius", r_max as u64);
                    for (d, &radius) in config.distances.iter().zip(&radii) {
                        let isolated = found.map(|f| f.nearest.is_none_or(|near| near > radius));
                        match isolated {
                            Some(b) => rec.put_bool(&format!("isolated_d={d}"), b),
                            None => rec.put_opt_int(&format!("isolated_d={d}"), None),
                        };
                    }
                    Ok((found, rec))
                })
            })?;
            let (found, recs): (Vec<Option<Found>>, Vec<_>) = results.into_iter().unzip();
            out.records.extend(recs);
            let kept: Vec<Found> = found.iter().flatten().copied().collect();
            let skipped = found.len() - kept.len();
            let tag = format!("n={n},alpha={factor}*alpha_c,m={m}");
            if skipped > 0 {
                out.notes.push(format!("{tag}: {skipped} replicas found no solution in {} draws and were skipped", config.retry_budget));
            }
            if kept.is_empty() {
                continue;
            }
            let mut histogram = vec![0usize; r_max + 2];
            for f in &kept {
                histogram[f.nearest.unwrap_or(r_max + 1)] += 1;
            }
            let hist_text: Vec<String> = histogram
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(d, c)| if d > r_max { format!(">{r_max}: {c}") } else { format!("{d}: {c}") })
                .collect();
            out.notes.push(format!("{tag}: nearest-solution distance histogram {{{}}}", hist_text.join(", ")));
            let mut freqs = Vec::new();
            for (d, &radius) in config.distances.iter().zip(&radii) {
                let isolated = kept.iter().filter(|f| f.nearest.is_none_or(|near| near > radius)).count();
                let (p, se) = proportion(isolated, kept.len());
                freqs.push((radius, p));
                out.verdicts.push(verdict(
                    format!("isolation[{tag},d={d}]"),
                    p,
                    f64::NAN,
                    se,
                    true,
                    false,
                    format!("report: isolated within radius {radius} in {isolated} of {} replicas", kept.len()),
                ));
            }
            // Larger radii can only find more neighbours.
            let mut by_radius = freqs.clone();
            by_radius.sort_by_key(|&(radius, _)| radius);
            let monotone = by_radius.windows(2).all(|w| w[1].1 <= w[0].1);
            out.verdicts.push(verdict(
                format!("isolation_monotone[{tag}]"),
                by_radius.last().map_or(f64::NAN, |&(_, p)| p),
                f64::NAN,
                f64::NAN,
                monotone,
                true,
                "isolation frequency nonincreasing in the radius",
            ));
        }
    }
    Ok(out)
}
