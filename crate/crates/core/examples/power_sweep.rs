//! A small Monte Carlo sweep: rejection rates with Wilson intervals over
//! sample sizes and shifts, printed as CSV.
//!
//! cargo run --release --example power_sweep [scenario]

use isomet::harness::{run_local_power, run_sweep, DeltaRule, Scenario, SweepConfig};
use isomet::io::write_sweep_csv;

fn main() -> isomet::Result<()> {
    let scenario: Scenario = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(Scenario::CircleVm);

    let mut grid = SweepConfig::new(
        scenario,
        vec![50, 100],
        DeltaRule::Grid(vec![0.0, 0.25, 0.5]),
    );
    grid.datasets = 100;
    grid.replicates = 199;
    grid.seed = 42;
    let rows = run_sweep(&grid)?;
    write_sweep_csv(std::io::stdout().lock(), &rows, false)?;

    // Local alternatives δ = c / √n keep power roughly constant in n.
    let mut local = grid.clone();
    local.deltas = DeltaRule::Local { c: 3.0 };
    let rows = run_local_power(&local)?;
    println!();
    write_sweep_csv(std::io::stdout().lock(), &rows, false)?;
    Ok(())
}
