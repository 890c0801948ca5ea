#![allow(dead_code)]

use panelconv::montecarlo::RegionEffects;
use panelconv::panel::Grid;
use panelconv::{PanelDataset, SimulationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Simulated panel with heterogeneous region effects.
pub fn random_panel(seed: u64, regions: usize, periods: usize) -> PanelDataset {
    let mut cfg = SimulationConfig::new(seed, regions, periods, -0.25);
    cfg.effects = RegionEffects::Random { variance: 0.01 };
    panelconv::simulate_panel(&cfg).unwrap()
}

/// Adds uniformly drawn structural variables on every cell.
pub fn with_structural(panel: PanelDataset, names: &[&str], seed: u64) -> PanelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = panel;
    for name in names {
        let mut grid = Grid::new(out.regions().len(), out.periods().len());
        for r in 0..out.regions().len() {
            for p in 0..out.periods().len() {
                grid.set(r, p, Some(rng.random_range(0.1..3.0)));
            }
        }
        out = out.with_structural(*name, grid).unwrap();
    }
    out
}

/// Drops cells so that the panel becomes unbalanced (first period and first
/// region always kept).
pub fn unbalance(panel: &PanelDataset, seed: u64, drop_share: f64) -> PanelDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first_region = panel.regions()[0].clone();
    let first_year = panel.periods()[0];
    PanelDataset::builder(panel.sector(), panel.regions().to_vec(), panel.periods().to_vec())
        .fill(|r, y| {
            let keep = r == first_region || y == first_year || rng.random::<f64>() >= drop_share;
            if keep { panel.value(r, y) } else { None }
        })
        .build()
        .unwrap()
}
