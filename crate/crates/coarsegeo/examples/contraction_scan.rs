//! Largest projection diameter of geodesics far from a peripheral coset,
//! for every geodesic between vertex pairs of a ball.

use coarsegeo::coarse::{coset_subset, format_coset, scan_geodesic_projections};
use coarsegeo::{Element, GroupModel, MetricGraph, PeripheralCoset};

fn main() -> coarsegeo::Result<()> {
    for (model, radius) in [(GroupModel::f2(), 7), (GroupModel::z2_star_z2(), 4)] {
        let g = MetricGraph::ball(&model, radius, 1 << 22)?;
        let x = PeripheralCoset::new(Element::identity(), 0);
        let scan = scan_geodesic_projections(&g, &coset_subset(&g, &x), 2)?;
        println!("{} ball {radius} ({} vertices), X = {}:", model.name(), g.n_vertices(), format_coset(&model, &x));
        for (mu, (d, far)) in scan.max_diam_at_mu.iter().zip(&scan.far_pairs_at_mu).enumerate() {
            let d = d.map_or("-".to_string(), |d| d.to_string());
            println!("  mu={mu}: {far} far geodesics, max projection diameter {d}");
        }
    }
    Ok(())
}
