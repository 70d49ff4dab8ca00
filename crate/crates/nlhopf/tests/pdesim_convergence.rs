//! Discretisation checks on the long homogeneous-oscillation run.

use nlhopf::model::holling_tanner;
use nlhopf::pdesim::{classify_attractor, preset, simulate, Grid, SimConfig};
use rayon::prelude::*;

#[test]
fn doubling_the_grid_keeps_the_amplitude() {
    let spec = holling_tanner(1.0, 0.35, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap();
    let pre = preset("d2", 1.0).unwrap();
    let cfg = SimConfig { t_end: 5000.0, ic: pre.ic.clone(), ..SimConfig::default() };
    let amps: Vec<f64> = [128usize, 256]
        .par_iter()
        .map(|&m| {
            let tr = simulate(&spec, pre.mu, Grid::new(m, spec.ell).unwrap(), &cfg).unwrap();
            classify_attractor(&tr, &cfg).unwrap().metrics.temporal_amplitude
        })
        .collect();
    let change = (amps[1] - amps[0]).abs() / amps[1];
    assert!(change < 0.02, "peak-to-peak {amps:?}, relative change {change:e}");
}

#[test]
fn probe_series_follows_the_grid() {
    let spec = holling_tanner(1.0, 0.35, 0.1, 0.6, 0.2, 8f64.sqrt()).unwrap();
    let pre = preset("d6", 1.0).unwrap();
    let cfg = SimConfig { t_end: 200.0, transient_fraction: 0.0, ic: pre.ic.clone(), ..SimConfig::default() };
    let finals: Vec<Vec<f64>> = [64usize, 128]
        .iter()
        .map(|&m| simulate(&spec, pre.mu, Grid::new(m, spec.ell).unwrap(), &cfg).unwrap().u_probe)
        .collect();
    // the coarse and fine probes sample the same node x = π
    let (a, b) = (finals[0].last().unwrap(), finals[1].last().unwrap());
    assert!((a - b).abs() < 1e-2, "{a} vs {b}");
}
