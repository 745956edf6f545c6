//! Checks the sigma bound for peripheral cosets of Z^2 * Z^2 with
//! sigma(U) = 3 max(U, mu) + eps.

use coarsegeo::coarse::{check_quasiconvex, coset_subset, format_coset, sigma_of, RateFunction};
use coarsegeo::{GroupModel, MetricGraph, PeripheralCoset};

fn main() -> coarsegeo::Result<()> {
    let model = GroupModel::z2_star_z2();
    let g = MetricGraph::ball(&model, 5, 1 << 22)?;
    let sigma = sigma_of(&RateFunction::constant(1), &RateFunction::constant(1))?;
    for (rep, factor) in [("1", 0), ("1", 1), ("b1 a2", 1), ("a1^-1 b2", 0)] {
        let x = PeripheralCoset::new(model.parse(rep)?, factor);
        for r in check_quasiconvex(&g, &coset_subset(&g, &x), &[0, 1, 2], &sigma)? {
            println!(
                "{:>14}  U={}  sigma={}  pairs={:>6}  max excursion={}  {}",
                format_coset(&model, &x),
                r.u,
                r.sigma,
                r.pairs,
                r.max_observed,
                if r.pass { "ok" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}
