//! PoFB over a small (r, p) grid, written as CSV to stdout.

use o2bench::pofb::{log_grid, pofb_sweep, write_sweep_csv, FusionRule, PofbTarget, SweepGrid};

fn main() -> o2bench::Result<()> {
    let grid = SweepGrid {
        r: log_grid(0.01, 100.0, 5),
        p: vec![0.0, 1.0, 3.0, 10.0],
        m: vec![0.0],
        samples: 20_000,
    };
    let cells = pofb_sweep(&grid, PofbTarget::X, FusionRule::Kf, 1)?;
    write_sweep_csv(&cells, std::io::stdout().lock())
}
