use std::path::{Path, PathBuf};

use super::config::{RunConfig, StopMode};
use super::output::{Cell, Table};
use crate::spectral::{
    self, activity_hf, dark_subspace, gc_residual, theta_scan, uniform_grid, ONE_SIDED_OFFSET,
};
use crate::spin_algebra::{ModelParams, DIM};
use crate::trajectories::{
    blink_threshold, blinking_segments, empirical_ft, ensemble_stats, matched_horizon, net_count,
    sample_ensemble, Binning, JumpRecord, Phase, Stop,
};
use crate::{Error, Result};

fn stop_for(cfg: &RunConfig, p: &ModelParams) -> Result<Stop> {
    match cfg.ensemble.stop {
        StopMode::Jumps => Ok(Stop::Jumps(cfg.n_jumps())),
        StopMode::MatchedTime => matched_horizon(p, cfg.n_jumps()),
    }
}

fn stop_label(stop: Stop) -> String {
    match stop {
        Stop::MaxTime(t) => format!("time {t}"),
        Stop::Jumps(n) => format!("jumps {n}"),
    }
}

fn ensemble(cfg: &RunConfig, p: &ModelParams, seed: u64) -> Result<(Stop, Vec<JumpRecord>)> {
    let stop = stop_for(cfg, p)?;
    log::info!(
        "sampling {} trajectories ({}) at nbar = {}",
        cfg.n_trajectories(),
        stop_label(stop),
        p.nbar
    );
    Ok((stop, sample_ensemble(p, cfg.n_trajectories(), seed, stop)?))
}

pub fn spectrum(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.model;
    let grid = uniform_grid(cfg.scan.s_min, cfg.scan.s_max, cfg.scan.n_points);
    let scan = theta_scan(&p, &grid)?;
    let mut table = Table::new(&["s", "theta", "activity"]);
    table.scalar("nbar", p.nbar).scalar("gamma_single", p.gamma_single);
    if p.nbar > 0.0 {
        let s0 = spectral::gc_symmetry_point(p.nbar)?;
        table
            .scalar("s0", s0)
            .scalar("gc_residual", gc_residual(&p, &grid)?);
    }
    for i in 0..grid.len() {
        table.row(&[&scan.s_values[i], &scan.theta[i], &scan.activity[i]]);
    }
    let mut kinks = Table::new(&["s_star", "k_minus", "k_plus", "delta_k"]);
    kinks
        .scalar("n_kinks", scan.kinks.len())
        .scalar("one_sided_offset", ONE_SIDED_OFFSET);
    for k in &scan.kinks {
        kinks.row(&[&k.s_star, &k.k_minus, &k.k_plus, &k.delta_k]);
    }
    Ok(vec![
        table.write(dir, "spectrum.csv", cfg, seed)?,
        kinks.write(dir, "kinks.csv", cfg, seed)?,
    ])
}

pub fn trajectories(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.model;
    let (stop, records) = ensemble(cfg, &p, seed)?;
    let burn = cfg.ensemble.burn_in_fraction;
    let stats = ensemble_stats(&records, burn, Binning::FreedmanDiaconis)?;
    let trapped = records.iter().filter(|r| r.dark_trapped).count();

    let mut acts = Table::new(&[
        "trajectory",
        "activity",
        "net_count",
        "n_events",
        "total_time",
        "dark_trapped",
    ]);
    acts.scalar("stop", stop_label(stop))
        .scalar("burn_in_fraction", burn)
        .scalar("n_trajectories", records.len())
        .scalar("mean", stats.mean)
        .scalar("std", stats.std)
        .scalar("std_error", stats.std_error)
        .scalar("zero_fraction", stats.zero_fraction)
        .scalar("active_mean", stats.active_mean)
        .scalar("bimodality", stats.bimodality)
        .scalar("modes", stats.modes.clone())
        .scalar("dark_trapped_fraction", trapped as f64 / records.len() as f64);
    for (i, (r, a)) in records.iter().zip(&stats.activities).enumerate() {
        acts.row(&[
            &i,
            a,
            &net_count(r, burn * r.total_time),
            &r.events.len(),
            &r.total_time,
            &r.dark_trapped,
        ]);
    }

    let mut hist = Table::new(&["bin_lo", "bin_hi", "count"]);
    hist.scalar("binning", "freedman-diaconis");
    for (i, c) in stats.histogram.counts.iter().enumerate() {
        hist.row(&[&stats.histogram.edges[i], &stats.histogram.edges[i + 1], c]);
    }

    let n_sample = cfg.ensemble.sample_events.min(records.len());
    let mut events = Table::new(&["trajectory", "time", "channel", "weight"]);
    events.scalar("sampled_trajectories", n_sample);
    for (i, r) in records.iter().take(n_sample).enumerate() {
        for e in &r.events {
            events.row(&[&i, &e.time, &e.channel, &e.weight]);
        }
    }

    let threshold = blink_threshold(&p)?;
    let window = cfg.ensemble.blink_window.unwrap_or(25.0 / threshold);
    let mut blink = Table::new(&["trajectory", "start", "end", "phase"]);
    blink
        .scalar("window", window)
        .scalar("rate_threshold", threshold);
    for (i, r) in records.iter().take(n_sample).enumerate() {
        match blinking_segments(r, window, threshold) {
            Ok(segments) => {
                for s in segments {
                    let phase = match s.phase {
                        Phase::Active => "active",
                        Phase::Inactive => "inactive",
                    };
                    blink.row(&[&i, &s.start, &s.end, &phase]);
                }
            }
            Err(Error::WindowTooLong { .. }) => {
                log::warn!("trajectory {i} shorter than the blinking window {window}")
            }
            Err(e) => return Err(e),
        }
    }

    Ok(vec![
        acts.write(dir, "activities.csv", cfg, seed)?,
        hist.write(dir, "histogram.csv", cfg, seed)?,
        events.write(dir, "events.csv", cfg, seed)?,
        blink.write(dir, "blinking.csv", cfg, seed)?,
    ])
}

pub fn dark(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let d = dark_subspace(&cfg.model)?;
    let mut columns = vec!["index", "energy"];
    const AMPS: [&str; 2 * DIM] = [
        "re_0", "im_0", "re_1", "im_1", "re_2", "im_2", "re_3", "im_3", "re_4", "im_4", "re_5",
        "im_5", "re_6", "im_6", "re_7", "im_7",
    ];
    columns.extend(AMPS);
    let mut table = Table::new(&columns);
    let lowering_ok = d.no_vector_annihilated_by_site1_lowering();
    let kernels_ok = d.site1_kernels_intersect_trivially();
    table
        .scalar("dimension", d.dimension)
        .scalar("inactive_fraction", d.dimension as f64 / DIM as f64)
        .scalar("no_dark_vector_annihilated_by_site1_lowering", lowering_ok)
        .scalar("site1_lowering_min_singular_value", d.site1_lowering_min_sv)
        .scalar("site1_kernels_intersect_trivially", kernels_ok)
        .scalar("site1_kernel_min_singular_value", d.site1_kernel_min_sv);
    for (j, (e, v)) in d.energies.iter().zip(&d.basis).enumerate() {
        let mut cells: Vec<&dyn Cell> = vec![&j, e];
        for (re, im) in v {
            cells.push(re);
            cells.push(im);
        }
        table.row(&cells);
    }
    let path = table.write(dir, "dark.csv", cfg, seed)?;
    if !(lowering_ok && kernels_ok) {
        return Err(Error::CheckFailed(format!(
            "dark-subspace checks: lowering {lowering_ok}, kernels {kernels_ok}"
        )));
    }
    Ok(vec![path])
}

pub fn ft(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let p = cfg.model;
    let (stop, records) = ensemble(cfg, &p, seed)?;
    let e = &cfg.ensemble;
    let table = empirical_ft(&records, e.ft_k_max, e.ft_window, e.burn_in_fraction)?;
    let mut out = Table::new(&["K", "count_pos", "count_neg", "log_ratio", "predicted"]);
    out.scalar("stop", stop_label(stop))
        .scalar("window", table.window)
        .scalar("n_windows", table.n_windows)
        .scalar("negative_windows", table.negative_windows)
        .scalar("s0", table.s0)
        .scalar("slope", table.slope)
        .scalar("slope_stderr", table.slope_stderr)
        .scalar("omitted", table.omitted.clone());
    for r in &table.rows {
        out.row(&[&r.k, &r.count_pos, &r.count_neg, &r.log_ratio, &r.predicted]);
    }
    Ok(vec![out.write(dir, "ft.csv", cfg, seed)?])
}

/// Spectral k(0), or the one-sided k(0⁻) where the leading eigenvalue is
/// degenerate at s = 0.
pub fn spectral_activity(p: &ModelParams) -> Result<(f64, &'static str)> {
    match activity_hf(p, 0.0) {
        Ok(k) => Ok((k, "perturbative")),
        Err(Error::DegenerateLeading { .. }) => {
            Ok((activity_hf(p, -ONE_SIDED_OFFSET)?, "one_sided_minus"))
        }
        Err(e) => Err(e),
    }
}

pub fn compare(cfg: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut table = Table::new(&[
        "nbar",
        "spectral_k",
        "spectral_method",
        "ensemble_mean",
        "ensemble_std",
        "std_error",
        "z_score",
        "within_3se",
    ]);
    table
        .scalar("gamma_single", cfg.model.gamma_single)
        .scalar("n_trajectories", cfg.n_trajectories())
        .scalar("burn_in_fraction", cfg.ensemble.burn_in_fraction);
    for &nbar in &cfg.ensemble.nbar_sweep {
        let p = cfg.model.with_nbar(nbar);
        let (k, method) = spectral_activity(&p)?;
        let (_, records) = ensemble(cfg, &p, seed)?;
        let stats = ensemble_stats(&records, cfg.ensemble.burn_in_fraction, Binning::FreedmanDiaconis)?;
        let z = (stats.mean - k) / stats.std_error;
        table.row(&[
            &nbar,
            &k,
            &method,
            &stats.mean,
            &stats.std,
            &stats.std_error,
            &z,
            &(z.abs() < 3.0),
        ]);
    }
    Ok(vec![table.write(dir, "compare.csv", cfg, seed)?])
}
